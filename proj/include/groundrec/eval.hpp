#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "groundrec/bm25.hpp"
#include "groundrec/collab.hpp"
#include "groundrec/embed.hpp"
#include "groundrec/generate.hpp"
#include "groundrec/ground.hpp"
#include "groundrec/ingest.hpp"
#include "groundrec/popularity.hpp"

namespace groundrec {

inline const std::vector<std::size_t> kDefaultKs{1, 3, 5, 10, 20};

/// 1 iff the 1-based `position` is within the top K.
inline int hr_at_k(std::size_t position, std::size_t k) { return position >= 1 && position <= k ? 1 : 0; }

/// Single relevant item: 1 / log2(position + 1) inside the top K, else 0.
double ndcg_at_k(std::size_t position, std::size_t k);

/// Throws DataError if `target` was excluded from `ranked`.
int hr_at_k(const RankedList& ranked, ItemIndex target, std::size_t k);
double ndcg_at_k(const RankedList& ranked, ItemIndex target, std::size_t k);

struct MetricsReport {
    std::vector<std::size_t> ks;
    std::vector<double> hr;
    std::vector<double> ndcg;
    std::size_t n_samples = 0;  // evaluated samples
    std::size_t n_skipped = 0;  // target already in known items
    std::map<std::string, std::string> fingerprint;

    /// "hr@10" / "ndcg@20"; throws UsageError for unknown names.
    double metric(std::string_view name) const;
    /// (name, value) in file order: every ndcg@K then every hr@K.
    std::vector<std::pair<std::string, double>> metrics() const;
};

/// Folds 1-based target positions into HR/NDCG means. Hits are tallied per
/// position so the result does not depend on sample order.
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(std::vector<std::size_t> ks = kDefaultKs);
    void add(std::size_t position);
    void skip() { ++skipped_; }
    MetricsReport report() const;

private:
    std::vector<std::size_t> ks_;
    std::vector<std::size_t> hits_at_;  // hits_at_[p] = targets found at position p (1-based)
    std::size_t n_ = 0;
    std::size_t skipped_ = 0;
};

/// Everything needed to turn a sample into a ranking. Pointers are
/// non-owning; only the members the strategy/injection needs must be set.
struct Pipeline {
    const ItemCatalog* catalog = nullptr;
    const Generator* generator = nullptr;
    Strategy strategy = Strategy::l2;
    // l2
    const EmbeddingMatrixf* items = nullptr;
    const EmbeddingProvider* provider = nullptr;
    GroundingConfig grounding;
    const PopularityTable* popularity = nullptr;
    const CoScorer* collab = nullptr;
    // bm25
    const Bm25Index* bm25 = nullptr;

    /// Throws UsageError when a required component is missing.
    void validate() const;
};

/// Per-item injection weights for a sample (P or normalized collaborative
/// scores); empty when injection is none.
Eigen::VectorXd injection_weights(const Pipeline& pipeline, const SequenceSample& sample);

/// Catalog indices of the sample's known items (unknown ids are ignored).
std::vector<ItemIndex> known_indices(const SequenceSample& sample, const ItemCatalog& catalog);

/// Generate, embed and ground one sample.
RankedList rank_sample(const Pipeline& pipeline, const SequenceSample& sample);

struct EvalOptions {
    std::vector<std::size_t> ks = kDefaultKs;
    unsigned threads = 1;
    std::size_t keep_top = 0;  // > 0: keep this many ranked items per sample
};

struct SampleOutcome {
    bool skipped = false;
    std::size_t position = 0;  // 1-based target position
    RankedList top;            // truncated to EvalOptions::keep_top
};

struct EvalResult {
    MetricsReport report;
    std::vector<SampleOutcome> outcomes;  // sample order
};

/// All-ranking evaluation: every item outside the sample's known items is a
/// candidate. Samples whose target is already known are skipped and counted.
/// Output is identical for any thread count.
EvalResult evaluate(const std::vector<SequenceSample>& samples, const Pipeline& pipeline,
                    const EvalOptions& options = {});

/// Ranks by training count descending, ties by index, minus known items.
MetricsReport most_pop_baseline(const PopularityTable& table, const ItemCatalog& catalog,
                                const std::vector<SequenceSample>& samples,
                                const std::vector<std::size_t>& ks = kDefaultKs);

/// Content digest identifying a sample set (for report fingerprints).
std::string samples_digest(const std::vector<SequenceSample>& samples);

/// (combined - max(a, b)) / max(a, b) per metric; nullopt where max == 0.
/// Throws DataError when the K sets differ, or when the sample-set
/// fingerprints differ and `force` is false.
std::vector<std::pair<std::string, std::optional<double>>> improve2lv(const MetricsReport& a,
                                                                      const MetricsReport& b,
                                                                      const MetricsReport& combined,
                                                                      bool force = false);

/// Same checks as improve2lv; returns (name, value of each report...).
std::vector<std::pair<std::string, std::vector<double>>> compare_reports(
    const std::vector<MetricsReport>& reports, bool force = false);

std::string format_report(const MetricsReport& report);
std::string format_report_json(const MetricsReport& report);
MetricsReport parse_report(std::string_view text);
void write_report(const std::filesystem::path& path, const MetricsReport& report, bool json = false);
MetricsReport read_report(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

}  // namespace groundrec
