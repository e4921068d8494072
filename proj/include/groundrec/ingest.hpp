#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "groundrec/common.hpp"

namespace groundrec {

struct Interaction {
    std::string user_id;
    std::string item_id;
    std::int64_t timestamp = 0;
    std::optional<std::string> domain_tag;
};

/// Interactions stably ordered by (timestamp, input position).
class InteractionLog {
public:
    InteractionLog() = default;
    /// Sorts `records` by timestamp; equal timestamps keep their given order.
    explicit InteractionLog(std::vector<Interaction> records);

    const std::vector<Interaction>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const Interaction& operator[](std::size_t i) const { return records_[i]; }

    /// Records [begin, end) as a new log; order is already sorted.
    InteractionLog slice(std::size_t begin, std::size_t end) const;

private:
    std::vector<Interaction> records_;
};

struct ParseStats {
    std::size_t lines = 0;     // non-empty, non-comment lines
    std::size_t rejected = 0;  // bad field count, empty ids, non-integer timestamp
};

/// Parses `user \t item \t timestamp [\t domain]` lines; `#` lines are comments.
/// Throws DataError when the file cannot be read, when more than 10% of lines
/// are rejected, or when an item id equals the reserved PAD token.
InteractionLog parse_interactions(const std::filesystem::path& path, ParseStats* stats = nullptr);
InteractionLog parse_interactions_text(std::string_view text, ParseStats* stats = nullptr);

void write_interactions(const std::filesystem::path& path, const InteractionLog& log);

struct CatalogEntry {
    std::string item_id;
    std::string title;
    std::optional<std::string> domain_tag;
};

/// Item id <-> title map with canonical indices assigned by sorted item id.
class ItemCatalog {
public:
    ItemCatalog() = default;
    /// Throws DataError on duplicate ids, empty titles or a PAD-token id.
    explicit ItemCatalog(std::vector<CatalogEntry> entries);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const CatalogEntry& entry(ItemIndex i) const { return entries_[i]; }
    const std::string& item_id(ItemIndex i) const { return entries_[i].item_id; }
    const std::string& title(ItemIndex i) const { return entries_[i].title; }
    const std::vector<CatalogEntry>& entries() const { return entries_; }

    std::optional<ItemIndex> find(std::string_view item_id) const;
    /// Throws DataError for unknown ids.
    ItemIndex index_of(std::string_view item_id) const;

    /// Shared domain tag when every entry carries the same one.
    std::optional<std::string> domain_tag() const;

private:
    std::vector<CatalogEntry> entries_;
    std::unordered_map<std::string, ItemIndex> index_;
};

ItemCatalog parse_catalog(const std::filesystem::path& path);
ItemCatalog parse_catalog_text(std::string_view text);

enum class Partition { train, valid, test };

Partition parse_partition(std::string_view name);
std::string_view to_string(Partition p);

/// Ten contiguous equal-count periods of a sorted log: 8 train, 1 valid, 1 test.
struct SplitLog {
    InteractionLog train;
    InteractionLog valid;
    InteractionLog test;
    /// Global record offset where each of periods 2..10 starts.
    std::array<std::size_t, 9> boundaries{};
    /// Size of each of the 10 periods.
    std::array<std::size_t, 10> period_sizes{};

    /// Partition owning global record position `pos` of the source log.
    Partition partition_of(std::size_t pos) const;
};

/// Throws DataError when the log has fewer than 10 records.
SplitLog temporal_split(const InteractionLog& log);

struct SequenceSample {
    std::string user_id;
    std::array<std::string, kHistoryLength> history;  // left-padded with kPadToken
    std::string target;
    std::int64_t target_timestamp = 0;
    std::set<std::string> known_items;  // user's items strictly before target_timestamp

    /// Non-PAD history items, oldest first.
    std::vector<std::string> effective_history() const;
};

/// One sample per interaction in `which` that has at least one predecessor in
/// the user's full timeline. Histories cross partition boundaries.
std::vector<SequenceSample> build_samples(const InteractionLog& log, const SplitLog& split,
                                          Partition which);

/// min(n, |samples|) samples chosen uniformly without replacement, returned in
/// their original relative order. Generator: std::mt19937_64 seeded with
/// `seed`, bounded draws by rejection (implementation-independent).
std::vector<SequenceSample> sample_eval(const std::vector<SequenceSample>& samples, std::size_t n,
                                        std::uint64_t seed);

inline constexpr const char* kSamplerName = "mt19937_64+rejection-fisher-yates";

/// Sample file: `user \t target_timestamp \t target \t h0..h9 \t known...`.
std::string format_samples(const std::vector<SequenceSample>& samples);
void write_samples(const std::filesystem::path& path, const std::vector<SequenceSample>& samples);
std::vector<SequenceSample> read_samples(const std::filesystem::path& path);

/// Reads the whole file; throws DataError if unreadable.
std::string read_file(const std::filesystem::path& path);

/// Splits on '\t' keeping empty fields.
std::vector<std::string_view> split_tabs(std::string_view line);

}  // namespace groundrec
