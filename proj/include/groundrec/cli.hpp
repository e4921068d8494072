#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace groundrec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `groundrec` tool. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Re-executes the argv recorded in a manifest after checking that every
/// recorded input still has the same digest.
int replay(const std::string& manifest_path, std::ostream& out, std::ostream& err);

}  // namespace groundrec::cli
