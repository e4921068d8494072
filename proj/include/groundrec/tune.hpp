#pragma once

#include <string>
#include <vector>

#include "groundrec/eval.hpp"

namespace groundrec {

/// 0.00, 0.01, ..., 1.00 followed by 2, 3, ..., 100 (200 values).
std::vector<double> gamma_grid();

struct SweepRow {
    double gamma = 0.0;
    MetricsReport report;
};

struct TuneResult {
    double best_gamma = 0.0;
    std::string metric;
    std::vector<SweepRow> sweep;
};

struct TuneOptions {
    std::string metric = "ndcg@20";
    std::vector<std::size_t> ks = kDefaultKs;
    std::vector<double> grid = gamma_grid();
    unsigned threads = 1;
};

/// Sweeps gamma over the grid, reusing each sample's normalized distances and
/// weights across grid points. Best gamma maximizes the metric, ties going to
/// the smallest gamma. Throws DataError on an empty validation set.
TuneResult tune_gamma(const std::vector<SequenceSample>& valid, const Pipeline& pipeline,
                      const TuneOptions& options = {});

/// TSV: gamma then one column per metric.
std::string format_sweep(const TuneResult& result);

}  // namespace groundrec
