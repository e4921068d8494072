#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace groundrec {

/// Canonical item position in an ItemCatalog (sorted item_id order).
using ItemIndex = std::uint32_t;

/// Reserved history filler. Must not collide with any real item id.
inline constexpr const char* kPadToken = "<PAD>";

/// Fixed history length of a next-item sample (window of 11 minus the target).
inline constexpr std::size_t kHistoryLength = 10;

/// Bad or inconsistent input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller misuse (bad flag combination, invalid parameter). Exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace groundrec
