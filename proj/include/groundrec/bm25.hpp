#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "groundrec/ground.hpp"
#include "groundrec/ingest.hpp"
#include "groundrec/tokenize.hpp"

namespace groundrec {

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
};

/// Okapi BM25 over tokenized catalog titles. IDF uses the non-negative form
/// log(1 + (N - n + 0.5) / (n + 0.5)), so every score is >= 0.
class Bm25Index {
public:
    Bm25Index(const ItemCatalog& catalog, Bm25Params params = {});
    Bm25Index(const std::vector<Tokens>& documents, Bm25Params params = {});

    /// One score per document; repeated query tokens contribute repeatedly.
    Eigen::VectorXd scores(const Tokens& query) const;
    double idf(const std::string& term) const;
    std::size_t size() const { return lengths_.size(); }
    const Bm25Params& params() const { return params_; }

private:
    Bm25Params params_;
    std::vector<double> lengths_;
    double avg_length_ = 0.0;
    // term -> (document, term frequency)
    std::unordered_map<std::string, std::vector<std::pair<ItemIndex, double>>> postings_;
};

/// Descending score, ties by index. An empty query yields index order and a warning.
RankedList bm25_rank(const Bm25Index& index, const Tokens& query,
                     std::span<const ItemIndex> exclusions);

}  // namespace groundrec
