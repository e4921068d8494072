#include "groundrec/bm25.hpp"

#include <cmath>
#include <map>

namespace groundrec {

namespace {
std::vector<Tokens> tokenized_titles(const ItemCatalog& catalog) {
    std::vector<Tokens> docs;
    docs.reserve(catalog.size());
    for (const auto& e : catalog.entries()) docs.push_back(tokenize(e.title));
    return docs;
}
}  // namespace

Bm25Index::Bm25Index(const ItemCatalog& catalog, Bm25Params params) : Bm25Index(tokenized_titles(catalog), params) {}

Bm25Index::Bm25Index(const std::vector<Tokens>& documents, Bm25Params params) : params_(params) {
    if (params_.k1 < 0 || params_.b < 0 || params_.b > 1) throw UsageError("bm25: need k1 >= 0 and b in [0,1]");
    lengths_.reserve(documents.size());
    double total = 0;
    for (std::size_t d = 0; d < documents.size(); ++d) {
        std::map<std::string, double> tf;
        for (const auto& t : documents[d]) tf[t] += 1.0;
        for (auto& [term, f] : tf) postings_[term].emplace_back(static_cast<ItemIndex>(d), f);
        lengths_.push_back(static_cast<double>(documents[d].size()));
        total += lengths_.back();
    }
    avg_length_ = documents.empty() ? 0.0 : total / static_cast<double>(documents.size());
}

double Bm25Index::idf(const std::string& term) const {
    const auto it = postings_.find(term);
    const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    const double n = static_cast<double>(lengths_.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

Eigen::VectorXd Bm25Index::scores(const Tokens& query) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lengths_.size()));
    const double k1 = params_.k1;
    const double b = params_.b;
    for (const auto& term : query) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double w = idf(term);
        for (const auto& [doc, tf] : it->second) {
            const double norm = avg_length_ > 0 ? lengths_[doc] / avg_length_ : 0.0;
            out[doc] += w * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
        }
    }
    return out;
}

RankedList bm25_rank(const Bm25Index& index, const Tokens& query, std::span<const ItemIndex> exclusions) {
    const Eigen::VectorXd s = index.scores(query);
    RankedList out = rank(Eigen::VectorXd(-s), exclusions, Strategy::bm25);
    for (auto& v : out.scores) v = -v + 0.0;
    if (query.empty()) {
        out.warning = "bm25: empty query, falling back to index order";
    } else if (s.size() > 0 && s.maxCoeff() <= 0.0) {
        out.warning = "bm25: query shares no term with any title, falling back to index order";
    }
    return out;
}

}  // namespace groundrec
