#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "groundrec/common.hpp"
#include "groundrec/embed.hpp"
#include "groundrec/minmax.hpp"

namespace groundrec {

// Grounding of a generated-text embedding onto the item catalog:
//
//   D_i  = || emb_i - oracle ||_2
//   D^_i = (D_i - min D) / (max D - min D)        (all zero if max == min)
//   D~_i = D^_i / (1 + w_i)^gamma
//
// where w_i is the normalized popularity P_i or a normalized collaborative
// score. Items are ranked by D~ ascending, ties by canonical index.

enum class Injection { none, popularity, collaborative };
enum class Strategy { l2, bm25 };

Injection parse_injection(std::string_view name);
std::string_view to_string(Injection injection);
Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);

struct GroundingConfig {
    Injection injection = Injection::none;
    double gamma = 0.0;
    bool normalize_embeddings = false;
};

/// Above this exponent adjusted distances are kept as log D~ so that
/// (1 + w)^gamma cannot underflow every candidate to the same value.
inline constexpr double kLogSpaceGamma = 30.0;

/// Euclidean distance from `oracle` to every row of `items`, accumulated in
/// double precision. Throws DataError on a dimension mismatch.
template <typename DerivedM, typename DerivedV>
Eigen::VectorXd l2_distances(const Eigen::MatrixBase<DerivedM>& items,
                             const Eigen::MatrixBase<DerivedV>& oracle) {
    if (items.cols() != oracle.size()) {
        throw DataError("l2_distances: oracle dim " + std::to_string(oracle.size()) +
                        " does not match embedding dim " + std::to_string(items.cols()));
    }
    const Eigen::RowVectorXd o = oracle.template cast<double>().transpose();
    Eigen::VectorXd out(items.rows());
    for (Eigen::Index i = 0; i < items.rows(); ++i) {
        out[i] = (items.row(i).template cast<double>() - o).norm();
    }
    return out;
}

/// D^ from D. All-equal distances normalize to zero.
template <typename Derived>
Eigen::VectorXd normalize_distances(const Eigen::MatrixBase<Derived>& raw) {
    return min_max_normalize(raw);
}

/// D~ values, or log D~ when `log_scale` (D^ == 0 maps to -inf). Both orders
/// agree with exact arithmetic; rank() works on either.
struct AdjustedDistances {
    Eigen::VectorXd values;
    bool log_scale = false;

    Eigen::Index size() const { return values.size(); }
    /// D~ in linear space; may underflow to 0 when log_scale.
    Eigen::VectorXd linear() const;
};

/// Single-item reweighting used by inject(); exposed so that the gamma sweep
/// computes keys identically.
inline double adjusted_key(double normalized, double weight, double gamma) {
    if (gamma > kLogSpaceGamma) {
        if (normalized == 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(normalized) - gamma * std::log1p(weight);
    }
    return normalized / std::pow(1.0 + weight, gamma);
}

/// D~ = D^ / (1 + w)^gamma. gamma == 0 returns D^ bit for bit.
/// Throws DataError if a weight lies outside [0,1] and UsageError for a
/// negative or non-finite gamma.
AdjustedDistances inject(const Eigen::VectorXd& normalized, const Eigen::VectorXd& weights,
                         double gamma);

/// Wraps D^ unchanged (injection = none).
AdjustedDistances no_injection(const Eigen::VectorXd& normalized);

struct RankedList {
    std::vector<ItemIndex> items;  // best first
    std::vector<double> scores;    // D~ (or log D~) for l2, BM25 score for bm25
    Strategy strategy = Strategy::l2;
    std::string warning;

    std::size_t size() const { return items.size(); }
    /// 1-based position of `item`, or nullopt if it was excluded.
    std::optional<std::size_t> position_of(ItemIndex item) const;
};

/// Boolean mask over `n` items; throws DataError for an out-of-range index.
std::vector<char> exclusion_mask(std::size_t n, std::span<const ItemIndex> exclusions);

/// Ascending sort of non-excluded items by `keys`, ties by index ascending.
/// Throws DataError if every item is excluded.
RankedList rank(const Eigen::VectorXd& keys, std::span<const ItemIndex> exclusions,
                Strategy strategy = Strategy::l2);
RankedList rank(const AdjustedDistances& adjusted, std::span<const ItemIndex> exclusions);

/// 1-based rank that rank() would assign to `target`, computed in O(n)
/// without sorting. `excluded` is an exclusion_mask(); target must not be excluded.
std::size_t rank_position(const Eigen::VectorXd& keys, const std::vector<char>& excluded,
                          ItemIndex target);

/// Full L2 grounding: distances, normalization, optional reweighting, rank.
/// `weights` is required unless cfg.injection == none.
template <typename DerivedM, typename DerivedV>
RankedList ground_l2(const Eigen::MatrixBase<DerivedM>& items,
                     const Eigen::MatrixBase<DerivedV>& oracle, const GroundingConfig& cfg,
                     const Eigen::VectorXd* weights, std::span<const ItemIndex> exclusions) {
    const Eigen::VectorXd normalized = normalize_distances(l2_distances(items, oracle));
    if (cfg.injection == Injection::none) return rank(no_injection(normalized), exclusions);
    if (weights == nullptr) throw UsageError("ground_l2: injection requires weights");
    return rank(inject(normalized, *weights, cfg.gamma), exclusions);
}

}  // namespace groundrec
