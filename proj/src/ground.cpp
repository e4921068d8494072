#include "groundrec/ground.hpp"

#include <algorithm>
#include <numeric>

namespace groundrec {

Injection parse_injection(std::string_view name) {
    if (name == "none") return Injection::none;
    if (name == "pop" || name == "popularity") return Injection::popularity;
    if (name == "collab" || name == "collaborative") return Injection::collaborative;
    throw UsageError("unknown injection '" + std::string(name) + "' (none|pop|collab)");
}

std::string_view to_string(Injection injection) {
    switch (injection) {
        case Injection::none: return "none";
        case Injection::popularity: return "pop";
        case Injection::collaborative: return "collab";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "l2") return Strategy::l2;
    if (name == "bm25") return Strategy::bm25;
    throw UsageError("unknown strategy '" + std::string(name) + "' (l2|bm25)");
}

std::string_view to_string(Strategy strategy) { return strategy == Strategy::l2 ? "l2" : "bm25"; }

Eigen::VectorXd AdjustedDistances::linear() const {
    if (!log_scale) return values;
    // std::exp rather than the vectorized exp, which turns -inf into a denormal
    return values.unaryExpr([](double v) { return std::exp(v); });
}

AdjustedDistances inject(const Eigen::VectorXd& normalized, const Eigen::VectorXd& weights, double gamma) {
    if (!std::isfinite(gamma) || gamma < 0.0) throw UsageError("gamma must be finite and >= 0");
    if (weights.size() != normalized.size()) {
        throw DataError("inject: " + std::to_string(weights.size()) + " weights for " +
                        std::to_string(normalized.size()) + " items");
    }
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0 && weights[i] <= 1.0)) {
            throw DataError("inject: weight " + std::to_string(weights[i]) + " of item " + std::to_string(i) +
                            " is outside [0,1] (unnormalized score source?)");
        }
    }
    AdjustedDistances out;
    out.log_scale = gamma > kLogSpaceGamma;
    out.values.resize(normalized.size());
    for (Eigen::Index i = 0; i < normalized.size(); ++i) {
        out.values[i] = adjusted_key(normalized[i], weights[i], gamma);
    }
    return out;
}

AdjustedDistances no_injection(const Eigen::VectorXd& normalized) { return {normalized, false}; }

std::optional<std::size_t> RankedList::position_of(ItemIndex item) const {
    const auto it = std::find(items.begin(), items.end(), item);
    if (it == items.end()) return std::nullopt;
    return static_cast<std::size_t>(it - items.begin()) + 1;
}

std::vector<char> exclusion_mask(std::size_t n, std::span<const ItemIndex> exclusions) {
    std::vector<char> mask(n, 0);
    for (ItemIndex e : exclusions) {
        if (e >= n) throw DataError("exclusion index " + std::to_string(e) + " out of range");
        mask[e] = 1;
    }
    return mask;
}

RankedList rank(const Eigen::VectorXd& keys, std::span<const ItemIndex> exclusions, Strategy strategy) {
    const auto n = static_cast<std::size_t>(keys.size());
    const auto mask = exclusion_mask(n, exclusions);
    RankedList out;
    out.strategy = strategy;
    out.items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) out.items.push_back(static_cast<ItemIndex>(i));
    }
    if (out.items.empty()) throw DataError("rank: every item is excluded");
    std::sort(out.items.begin(), out.items.end(), [&](ItemIndex a, ItemIndex b) {
        const double ka = keys[a];
        const double kb = keys[b];
        return ka < kb || (ka == kb && a < b);
    });
    out.scores.reserve(out.items.size());
    for (ItemIndex i : out.items) out.scores.push_back(keys[i]);
    return out;
}

RankedList rank(const AdjustedDistances& adjusted, std::span<const ItemIndex> exclusions) {
    return rank(adjusted.values, exclusions, Strategy::l2);
}

std::size_t rank_position(const Eigen::VectorXd& keys, const std::vector<char>& excluded, ItemIndex target) {
    const double kt = keys[target];
    std::size_t above = 0;
    for (Eigen::Index i = 0; i < keys.size(); ++i) {
        if (excluded[static_cast<std::size_t>(i)]) continue;
        const double ki = keys[i];
        if (ki < kt || (ki == kt && static_cast<ItemIndex>(i) < target)) ++above;
    }
    return above + 1;
}

}  // namespace groundrec
