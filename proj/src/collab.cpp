#include "groundrec/collab.hpp"

#include <cstring>
#include <unordered_map>

#include "groundrec/manifest.hpp"

namespace groundrec {

namespace {
constexpr char kMagic[4] = {'G', 'R', 'C', 'O'};
constexpr double kRecencyWeights[3] = {1.0, 0.5, 0.25};

void put_u32(std::string& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[k])) << (8 * k);
    return v;
}
}  // namespace

CoScorer::CoScorer(std::size_t num_items, std::map<std::pair<ItemIndex, ItemIndex>, std::uint32_t> counts,
                   double alpha)
    : num_items_(num_items), counts_(std::move(counts)), successors_(num_items) {
    set_alpha(alpha);
    for (const auto& [pair, c] : counts_) {
        if (pair.first >= num_items_ || pair.second >= num_items_) {
            throw DataError("co-occurrence pair references item outside the catalog");
        }
        successors_[pair.first].emplace_back(pair.second, c);
    }
}

void CoScorer::set_alpha(double alpha) {
    if (!std::isfinite(alpha) || alpha < 0) throw UsageError("alpha must be finite and >= 0");
    alpha_ = alpha;
}

std::uint32_t CoScorer::count(ItemIndex prev, ItemIndex next) const {
    const auto it = counts_.find({prev, next});
    return it == counts_.end() ? 0 : it->second;
}

Eigen::VectorXd CoScorer::score(const SequenceSample& sample, const ItemCatalog& catalog) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_items_));
    const auto history = sample.effective_history();
    if (history.empty()) return out;
    std::size_t used = 0;
    for (auto it = history.rbegin(); it != history.rend() && used < 3; ++it, ++used) {
        const auto h = catalog.find(*it);
        if (!h) continue;
        for (const auto& [next, c] : successors_[*h]) out[next] += kRecencyWeights[used] * c;
    }
    out.array() += alpha_;
    return out;
}

CoScorer fit_cooccurrence(const InteractionLog& train, const ItemCatalog& catalog, double alpha) {
    // Previous catalog item per user; unknown items break adjacency.
    std::unordered_map<std::string, std::optional<ItemIndex>> last;
    std::map<std::pair<ItemIndex, ItemIndex>, std::uint32_t> counts;
    for (const auto& r : train.records()) {
        const auto idx = catalog.find(r.item_id);
        auto& prev = last[r.user_id];
        if (prev && idx) ++counts[{*prev, *idx}];
        prev = idx;
    }
    return CoScorer(catalog.size(), std::move(counts), alpha);
}

void write_scorer(const std::filesystem::path& path, const CoScorer& scorer) {
    std::string out(kMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(scorer.counts().size()));
    for (const auto& [pair, c] : scorer.counts()) {
        put_u32(out, pair.first);
        put_u32(out, pair.second);
        put_u32(out, c);
    }
    write_file(path, out);
}

CoScorer read_scorer(const std::filesystem::path& path, std::size_t num_items, double alpha) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw DataError(path.string() + ": missing GRCO header");
    }
    const std::uint32_t n = get_u32(bytes.data() + 4);
    if (bytes.size() != 8 + std::size_t{n} * 12) throw DataError(path.string() + ": truncated scorer file");
    std::map<std::pair<ItemIndex, ItemIndex>, std::uint32_t> counts;
    const char* p = bytes.data() + 8;
    for (std::uint32_t k = 0; k < n; ++k, p += 12) {
        counts[{get_u32(p), get_u32(p + 4)}] = get_u32(p + 8);
    }
    return CoScorer(num_items, std::move(counts), alpha);
}

}  // namespace groundrec
