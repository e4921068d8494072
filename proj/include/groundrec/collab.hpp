#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "groundrec/ingest.hpp"
#include "groundrec/minmax.hpp"

namespace groundrec {

/// Adjacent-pair transition counts over per-user training timelines. Acts as
/// the collaborative prediction-score source for injection.
class CoScorer {
public:
    CoScorer() = default;
    CoScorer(std::size_t num_items, std::map<std::pair<ItemIndex, ItemIndex>, std::uint32_t> counts,
             double alpha = 0.0);

    std::size_t num_items() const { return num_items_; }
    double alpha() const { return alpha_; }
    void set_alpha(double alpha);
    std::uint32_t count(ItemIndex prev, ItemIndex next) const;
    const std::map<std::pair<ItemIndex, ItemIndex>, std::uint32_t>& counts() const { return counts_; }

    /// score(j) = sum over the last <= 3 history items h (weights 1, 0.5, 0.25,
    /// most recent first) of count(h, j), plus alpha once. Empty effective
    /// history gives all zeros.
    Eigen::VectorXd score(const SequenceSample& sample, const ItemCatalog& catalog) const;

private:
    std::size_t num_items_ = 0;
    double alpha_ = 0.0;
    std::map<std::pair<ItemIndex, ItemIndex>, std::uint32_t> counts_;
    // prev -> [(next, count)] for scoring
    std::vector<std::vector<std::pair<ItemIndex, std::uint32_t>>> successors_;
};

/// Pairs involving items missing from `catalog` are skipped.
CoScorer fit_cooccurrence(const InteractionLog& train, const ItemCatalog& catalog, double alpha = 0.0);

/// Per-query min-max onto [0,1], same degenerate policy as popularity.
inline Eigen::VectorXd normalize_scores(const Eigen::VectorXd& raw) { return min_max_normalize(raw); }

/// "GRCO", u32 pair count, then (u32 prev, u32 next, u32 count) little-endian.
void write_scorer(const std::filesystem::path& path, const CoScorer& scorer);
CoScorer read_scorer(const std::filesystem::path& path, std::size_t num_items, double alpha = 0.0);

}  // namespace groundrec
