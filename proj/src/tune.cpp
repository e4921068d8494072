#include "groundrec/tune.hpp"

#include "groundrec/parallel.hpp"

namespace groundrec {

std::vector<double> gamma_grid() {
    std::vector<double> grid;
    grid.reserve(200);
    for (int i = 0; i <= 100; ++i) grid.push_back(static_cast<double>(i) / 100.0);
    for (int g = 2; g <= 100; ++g) grid.push_back(static_cast<double>(g));
    return grid;
}

TuneResult tune_gamma(const std::vector<SequenceSample>& valid, const Pipeline& pipeline,
                      const TuneOptions& options) {
    if (valid.empty()) throw DataError("tune: empty validation set");
    if (options.grid.empty()) throw UsageError("tune: empty gamma grid");
    if (pipeline.strategy != Strategy::l2) throw UsageError("tune: gamma only applies to l2 grounding");
    pipeline.validate();
    // Validate the metric name up front.
    MetricsAccumulator(options.ks).report().metric(options.metric);

    const std::size_t n_grid = options.grid.size();
    // positions[s * n_grid + g]; 0 marks a skipped sample
    std::vector<std::size_t> positions(valid.size() * n_grid, 0);
    const Pipeline& p = pipeline;

    parallel_for(valid.size(), options.threads, [&](std::size_t s) {
        const SequenceSample& sample = valid[s];
        const ItemIndex target = p.catalog->index_of(sample.target);
        if (sample.known_items.contains(sample.target)) return;

        const GeneratedText gen = p.generator->generate(sample);
        EmbeddingVectorf oracle = p.provider->embed(gen.tokens);
        if (p.grounding.normalize_embeddings && oracle.norm() > 0) oracle.normalize();
        const Eigen::VectorXd normalized = normalize_distances(l2_distances(*p.items, oracle));
        const auto mask = exclusion_mask(p.catalog->size(), known_indices(sample, *p.catalog));
        const Eigen::VectorXd weights = p.grounding.injection == Injection::none
                                            ? Eigen::VectorXd::Zero(normalized.size())
                                            : injection_weights(p, sample);

        for (std::size_t g = 0; g < n_grid; ++g) {
            const AdjustedDistances adjusted = inject(normalized, weights, options.grid[g]);
            positions[s * n_grid + g] = rank_position(adjusted.values, mask, target);
        }
    });

    TuneResult result;
    result.metric = options.metric;
    result.sweep.reserve(n_grid);
    double best = -1.0;
    for (std::size_t g = 0; g < n_grid; ++g) {
        MetricsAccumulator acc(options.ks);
        for (std::size_t s = 0; s < valid.size(); ++s) {
            const std::size_t pos = positions[s * n_grid + g];
            if (pos == 0) {
                acc.skip();
            } else {
                acc.add(pos);
            }
        }
        SweepRow row{options.grid[g], acc.report()};
        const double value = row.report.metric(options.metric);
        if (value > best) {
            best = value;
            result.best_gamma = row.gamma;
        }
        result.sweep.push_back(std::move(row));
    }
    return result;
}

std::string format_sweep(const TuneResult& result) {
    std::string out = "# metric=" + result.metric + "\n# best_gamma=" + format_double(result.best_gamma) + "\ngamma";
    if (result.sweep.empty()) return out + "\n";
    for (const auto& [name, v] : result.sweep.front().report.metrics()) out += "\t" + name;
    out += "\n";
    for (const auto& row : result.sweep) {
        out += format_double(row.gamma);
        for (const auto& [name, v] : row.report.metrics()) out += "\t" + format_double(v);
        out += "\n";
    }
    return out;
}

}  // namespace groundrec
