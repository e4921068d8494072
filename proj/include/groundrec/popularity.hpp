#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "groundrec/ingest.hpp"
#include "groundrec/minmax.hpp"

namespace groundrec {

/// Per-item training interaction counts N^i, shares C_i = N^i / sum N and the
/// min-max normalized factor P_i. Indexed by canonical catalog index.
struct PopularityTable {
    std::vector<std::uint64_t> counts;
    Eigen::VectorXd share;       // C
    Eigen::VectorXd normalized;  // P
    std::size_t unknown_items = 0;  // training records whose item is not in the catalog

    std::size_t size() const { return counts.size(); }
    std::uint64_t total() const;

    /// Catalog indices ordered by count descending, ties by index ascending.
    std::vector<ItemIndex> order_by_count() const;
};

PopularityTable popularity_from_counts(std::vector<std::uint64_t> counts);

/// Throws DataError for an empty catalog.
PopularityTable compute_popularity(const InteractionLog& train, const ItemCatalog& catalog);

struct DecileReport {
    std::vector<std::vector<ItemIndex>> groups;  // 10 buckets, most popular first
    std::vector<double> share;                   // fraction of all interactions per bucket
    bool small_catalog = false;                  // fewer than 10 items
};

DecileReport decile_report(const PopularityTable& table);

/// TSV: item_id, count, C, P.
void write_popularity(const std::filesystem::path& path, const PopularityTable& table,
                      const ItemCatalog& catalog);
/// Reads counts back and recomputes C and P. Every catalog item must appear.
PopularityTable read_popularity(const std::filesystem::path& path, const ItemCatalog& catalog);

void write_deciles(const std::filesystem::path& path, const DecileReport& report,
                   const PopularityTable& table);

}  // namespace groundrec
