#include "groundrec/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <json.hpp>

#include "groundrec/manifest.hpp"
#include "groundrec/parallel.hpp"

namespace groundrec {

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double ndcg_at_k(std::size_t position, std::size_t k) {
    if (position < 1 || position > k) return 0.0;
    return 1.0 / std::log2(static_cast<double>(position) + 1.0);
}

namespace {
std::size_t required_position(const RankedList& ranked, ItemIndex target) {
    const auto pos = ranked.position_of(target);
    if (!pos) throw DataError("target item " + std::to_string(target) + " is excluded from the ranking");
    return *pos;
}
}  // namespace

int hr_at_k(const RankedList& ranked, ItemIndex target, std::size_t k) {
    return hr_at_k(required_position(ranked, target), k);
}

double ndcg_at_k(const RankedList& ranked, ItemIndex target, std::size_t k) {
    return ndcg_at_k(required_position(ranked, target), k);
}

double MetricsReport::metric(std::string_view name) const {
    for (std::size_t j = 0; j < ks.size(); ++j) {
        if (name == "hr@" + std::to_string(ks[j])) return hr[j];
        if (name == "ndcg@" + std::to_string(ks[j])) return ndcg[j];
    }
    throw UsageError("unknown metric " + std::string(name));
}

std::vector<std::pair<std::string, double>> MetricsReport::metrics() const {
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t j = 0; j < ks.size(); ++j) out.emplace_back("ndcg@" + std::to_string(ks[j]), ndcg[j]);
    for (std::size_t j = 0; j < ks.size(); ++j) out.emplace_back("hr@" + std::to_string(ks[j]), hr[j]);
    return out;
}

MetricsAccumulator::MetricsAccumulator(std::vector<std::size_t> ks) : ks_(std::move(ks)) {
    if (ks_.empty()) throw UsageError("metrics need at least one K");
    for (auto k : ks_) {
        if (k < 1) throw UsageError("K must be >= 1");
    }
    hits_at_.assign(*std::max_element(ks_.begin(), ks_.end()) + 1, 0);
}

void MetricsAccumulator::add(std::size_t position) {
    ++n_;
    if (position < hits_at_.size()) ++hits_at_[position];
}

MetricsReport MetricsAccumulator::report() const {
    MetricsReport r;
    r.ks = ks_;
    r.n_samples = n_;
    r.n_skipped = skipped_;
    for (auto k : ks_) {
        std::size_t hits = 0;
        double gain = 0.0;
        for (std::size_t p = 1; p <= k; ++p) {
            hits += hits_at_[p];
            gain += static_cast<double>(hits_at_[p]) * ndcg_at_k(p, k);
        }
        const double n = static_cast<double>(n_);
        r.hr.push_back(n_ ? static_cast<double>(hits) / n : 0.0);
        r.ndcg.push_back(n_ ? gain / n : 0.0);
    }
    return r;
}

void Pipeline::validate() const {
    if (!catalog) throw UsageError("pipeline: catalog missing");
    if (!generator) throw UsageError("pipeline: generator missing");
    if (strategy == Strategy::bm25) {
        if (!bm25) throw UsageError("pipeline: bm25 strategy needs an index");
        return;
    }
    if (!items || !provider) throw UsageError("pipeline: l2 strategy needs embeddings and a provider");
    if (static_cast<std::size_t>(items->rows()) != catalog->size()) {
        throw DataError("pipeline: embedding rows do not match the catalog");
    }
    if (items->cols() != provider->dim()) {
        throw DataError("pipeline: provider dim " + std::to_string(provider->dim()) + " != embedding dim " +
                        std::to_string(items->cols()));
    }
    if (grounding.injection == Injection::popularity &&
        (!popularity || popularity->size() != catalog->size())) {
        throw UsageError("pipeline: popularity injection needs a popularity table for this catalog");
    }
    if (grounding.injection == Injection::collaborative && (!collab || collab->num_items() != catalog->size())) {
        throw UsageError("pipeline: collaborative injection needs a co-occurrence scorer for this catalog");
    }
}

Eigen::VectorXd injection_weights(const Pipeline& pipeline, const SequenceSample& sample) {
    switch (pipeline.grounding.injection) {
        case Injection::none: return {};
        case Injection::popularity: return pipeline.popularity->normalized;
        case Injection::collaborative: return normalize_scores(pipeline.collab->score(sample, *pipeline.catalog));
    }
    return {};
}

std::vector<ItemIndex> known_indices(const SequenceSample& sample, const ItemCatalog& catalog) {
    std::vector<ItemIndex> out;
    out.reserve(sample.known_items.size());
    for (const auto& id : sample.known_items) {
        if (auto i = catalog.find(id)) out.push_back(*i);
    }
    return out;
}

RankedList rank_sample(const Pipeline& pipeline, const SequenceSample& sample) {
    const GeneratedText gen = pipeline.generator->generate(sample);
    const auto exclusions = known_indices(sample, *pipeline.catalog);
    if (pipeline.strategy == Strategy::bm25) return bm25_rank(*pipeline.bm25, gen.tokens, exclusions);

    EmbeddingVectorf oracle = pipeline.provider->embed(gen.tokens);
    if (pipeline.grounding.normalize_embeddings && oracle.norm() > 0) oracle.normalize();
    if (pipeline.grounding.injection == Injection::none) {
        return ground_l2(*pipeline.items, oracle, pipeline.grounding, nullptr, exclusions);
    }
    const Eigen::VectorXd weights = injection_weights(pipeline, sample);
    return ground_l2(*pipeline.items, oracle, pipeline.grounding, &weights, exclusions);
}

EvalResult evaluate(const std::vector<SequenceSample>& samples, const Pipeline& pipeline,
                    const EvalOptions& options) {
    pipeline.validate();
    EvalResult result;
    result.outcomes.resize(samples.size());
    parallel_for(samples.size(), options.threads, [&](std::size_t s) {
        const SequenceSample& sample = samples[s];
        SampleOutcome& out = result.outcomes[s];
        const ItemIndex target = pipeline.catalog->index_of(sample.target);
        if (sample.known_items.contains(sample.target)) {
            out.skipped = true;
            return;
        }
        RankedList ranked = rank_sample(pipeline, sample);
        out.position = required_position(ranked, target);
        if (options.keep_top > 0) {
            const std::size_t keep = std::min(options.keep_top, ranked.size());
            ranked.items.resize(keep);
            ranked.scores.resize(keep);
            out.top = std::move(ranked);
        }
    });

    MetricsAccumulator acc(options.ks);
    for (const auto& o : result.outcomes) {
        if (o.skipped) {
            acc.skip();
        } else {
            acc.add(o.position);
        }
    }
    result.report = acc.report();
    auto& fp = result.report.fingerprint;
    fp["generator"] = pipeline.generator->name();
    fp["strategy"] = std::string(to_string(pipeline.strategy));
    if (pipeline.strategy == Strategy::l2) {
        fp["provider"] = pipeline.provider->name();
        fp["injection"] = std::string(to_string(pipeline.grounding.injection));
        fp["gamma"] = format_double(pipeline.grounding.gamma);
        fp["normalize"] = pipeline.grounding.normalize_embeddings ? "1" : "0";
    }
    fp["samples"] = samples_digest(samples);
    return result;
}

MetricsReport most_pop_baseline(const PopularityTable& table, const ItemCatalog& catalog,
                                const std::vector<SequenceSample>& samples, const std::vector<std::size_t>& ks) {
    if (table.size() != catalog.size()) throw DataError("most-pop: table does not match catalog");
    Eigen::VectorXd keys(static_cast<Eigen::Index>(table.size()));
    for (std::size_t i = 0; i < table.size(); ++i) keys[static_cast<Eigen::Index>(i)] = -static_cast<double>(table.counts[i]);
    MetricsAccumulator acc(ks);
    for (const auto& sample : samples) {
        const ItemIndex target = catalog.index_of(sample.target);
        if (sample.known_items.contains(sample.target)) {
            acc.skip();
            continue;
        }
        const auto mask = exclusion_mask(catalog.size(), known_indices(sample, catalog));
        acc.add(rank_position(keys, mask, target));
    }
    MetricsReport r = acc.report();
    r.fingerprint["generator"] = "most-pop";
    r.fingerprint["strategy"] = "popularity";
    r.fingerprint["samples"] = samples_digest(samples);
    return r;
}

std::string samples_digest(const std::vector<SequenceSample>& samples) {
    return sha256_hex(format_samples(samples));
}

namespace {
void check_comparable(const MetricsReport& a, const MetricsReport& b, bool force) {
    if (a.ks != b.ks) throw DataError("reports use different K sets");
    const auto ia = a.fingerprint.find("samples");
    const auto ib = b.fingerprint.find("samples");
    const bool differ = ia != a.fingerprint.end() && ib != b.fingerprint.end() && ia->second != ib->second;
    if (differ && !force) throw DataError("reports were computed on different sample sets (use --force to override)");
}
}  // namespace

std::vector<std::pair<std::string, std::optional<double>>> improve2lv(const MetricsReport& a,
                                                                      const MetricsReport& b,
                                                                      const MetricsReport& combined,
                                                                      bool force) {
    check_comparable(a, b, force);
    check_comparable(a, combined, force);
    std::vector<std::pair<std::string, std::optional<double>>> out;
    const auto ma = a.metrics();
    const auto mb = b.metrics();
    const auto mc = combined.metrics();
    for (std::size_t j = 0; j < ma.size(); ++j) {
        const double larger = std::max(ma[j].second, mb[j].second);
        if (larger == 0.0) {
            out.emplace_back(ma[j].first, std::nullopt);
        } else {
            out.emplace_back(ma[j].first, (mc[j].second - larger) / larger);
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::vector<double>>> compare_reports(const std::vector<MetricsReport>& reports,
                                                                         bool force) {
    if (reports.size() < 2) throw UsageError("compare needs at least two reports");
    for (std::size_t r = 1; r < reports.size(); ++r) check_comparable(reports[0], reports[r], force);
    std::vector<std::pair<std::string, std::vector<double>>> out;
    for (const auto& [name, v] : reports[0].metrics()) {
        std::vector<double> row;
        for (const auto& rep : reports) row.push_back(rep.metric(name));
        out.emplace_back(name, std::move(row));
    }
    return out;
}

std::string format_report(const MetricsReport& report) {
    std::string out;
    for (const auto& [k, v] : report.fingerprint) out += "# fingerprint: " + k + "=" + v + "\n";
    out += "# n_samples: " + std::to_string(report.n_samples) + "\n";
    out += "# n_skipped: " + std::to_string(report.n_skipped) + "\n";
    for (const auto& [name, v] : report.metrics()) out += name + "\t" + format_double(v) + "\n";
    return out;
}

std::string format_report_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["fingerprint"] = report.fingerprint;
    j["n_samples"] = report.n_samples;
    j["n_skipped"] = report.n_skipped;
    j["ks"] = report.ks;
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [name, v] : report.metrics()) m[name] = v;
    j["metrics"] = m;
    return j.dump(2) + "\n";
}

namespace {
std::size_t parse_size(std::string_view s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw DataError("report: bad count '" + std::string(s) + "'");
    return v;
}

double parse_value(std::string_view s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw DataError("report: bad value '" + std::string(s) + "'");
    return v;
}

void add_metric(MetricsReport& r, std::map<std::size_t, std::pair<double, double>>& by_k, const std::string& name,
                double v) {
    const auto at = name.find('@');
    if (at == std::string::npos) throw DataError("report: bad metric name " + name);
    const std::size_t k = parse_size(std::string_view(name).substr(at + 1));
    const std::string base = name.substr(0, at);
    if (base == "hr") {
        by_k[k].first = v;
        if (std::find(r.ks.begin(), r.ks.end(), k) == r.ks.end()) r.ks.push_back(k);
    } else if (base == "ndcg") {
        by_k[k].second = v;
    } else {
        throw DataError("report: unknown metric " + name);
    }
}

void finish(MetricsReport& r, const std::map<std::size_t, std::pair<double, double>>& by_k) {
    for (auto k : r.ks) {
        r.hr.push_back(by_k.at(k).first);
        r.ndcg.push_back(by_k.at(k).second);
    }
}
}  // namespace

MetricsReport parse_report(std::string_view text) {
    MetricsReport r;
    std::map<std::size_t, std::pair<double, double>> by_k;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        const auto j = nlohmann::json::parse(text);
        for (const auto& [k, v] : j.at("fingerprint").items()) r.fingerprint[k] = v.get<std::string>();
        r.n_samples = j.at("n_samples").get<std::size_t>();
        r.n_skipped = j.at("n_skipped").get<std::size_t>();
        // iterate in ks order so the K list keeps its file order
        for (auto k : j.at("ks")) {
            const auto kk = k.get<std::size_t>();
            add_metric(r, by_k, "hr@" + std::to_string(kk), j.at("metrics").at("hr@" + std::to_string(kk)));
            add_metric(r, by_k, "ndcg@" + std::to_string(kk), j.at("metrics").at("ndcg@" + std::to_string(kk)));
        }
        finish(r, by_k);
        return r;
    }
    std::vector<std::pair<std::string, double>> ndcg_first;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        start = nl + 1;
        if (line.empty()) continue;
        if (line.starts_with("# fingerprint: ")) {
            line.remove_prefix(15);
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw DataError("report: bad fingerprint line");
            r.fingerprint[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
        } else if (line.starts_with("# n_samples: ")) {
            r.n_samples = parse_size(line.substr(13));
        } else if (line.starts_with("# n_skipped: ")) {
            r.n_skipped = parse_size(line.substr(13));
        } else if (line.front() != '#') {
            const auto f = split_tabs(line);
            if (f.size() != 2) throw DataError("report: expected metric<TAB>value");
            ndcg_first.emplace_back(std::string(f[0]), parse_value(f[1]));
        }
    }
    for (const auto& [name, v] : ndcg_first) add_metric(r, by_k, name, v);
    for (auto k : r.ks) {
        if (!by_k.contains(k)) throw DataError("report: missing metrics for K=" + std::to_string(k));
    }
    finish(r, by_k);
    return r;
}

void write_report(const std::filesystem::path& path, const MetricsReport& report, bool json) {
    write_file(path, json ? format_report_json(report) : format_report(report));
}

MetricsReport read_report(const std::filesystem::path& path) { return parse_report(read_file(path)); }

}  // namespace groundrec
