#include "groundrec/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "groundrec/bm25.hpp"
#include "groundrec/collab.hpp"
#include "groundrec/embed.hpp"
#include "groundrec/eval.hpp"
#include "groundrec/generate.hpp"
#include "groundrec/ground.hpp"
#include "groundrec/ingest.hpp"
#include "groundrec/manifest.hpp"
#include "groundrec/popularity.hpp"
#include "groundrec/tune.hpp"

namespace groundrec::cli {

namespace fs = std::filesystem;

namespace {

unsigned default_threads() {
    if (const char* env = std::getenv("GROUNDREC_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

// Flags shared by the commands that run the generate -> embed -> ground pipeline.
struct PipelineFlags {
    std::string catalog;
    std::string emb;
    std::string generator = "oracle";
    std::string inject = "none";
    double gamma = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t embed_seed = 17;
    std::string train;
    std::string scorer;
    double alpha = 0.0;
    std::string strategy = "l2";
    double k1 = 1.5;
    double b = 0.75;
    std::size_t order = 1;
    bool normalize = false;
    unsigned threads = 1;
};

void add_pipeline_flags(CLI::App* sub, PipelineFlags& f, bool with_gamma) {
    sub->add_option("--catalog", f.catalog, "Catalog TSV")->required();
    sub->add_option("--emb", f.emb, "Item embeddings (GREC binary or TSV)");
    sub->add_option("--generator", f.generator, "oracle|pop|ngram|most-pop")->capture_default_str();
    sub->add_option("--inject", f.inject, "none|pop|collab")->capture_default_str();
    if (with_gamma) sub->add_option("--gamma", f.gamma, "Injection exponent")->capture_default_str();
    sub->add_option("--seed", f.seed, "Generator seed")->capture_default_str();
    sub->add_option("--embed-seed", f.embed_seed, "Hash-embedding seed used for the item embeddings")
        ->capture_default_str();
    sub->add_option("--train", f.train, "Training interactions (popularity source)");
    sub->add_option("--scorer", f.scorer, "Co-occurrence scorer from collab-fit");
    sub->add_option("--alpha", f.alpha, "Co-occurrence smoothing")->capture_default_str();
    sub->add_option("--strategy", f.strategy, "l2|bm25")->capture_default_str();
    sub->add_option("--k1", f.k1, "BM25 k1")->capture_default_str();
    sub->add_option("--b", f.b, "BM25 b")->capture_default_str();
    sub->add_option("--order", f.order, "N-gram order")->capture_default_str();
    sub->add_flag("--normalize", f.normalize, "Unit-normalize item and oracle embeddings");
    sub->add_option("--threads", f.threads, "Worker threads (default $GROUNDREC_THREADS or 1)")
        ->capture_default_str();
}

// Owns everything a Pipeline points to.
struct LoadedPipeline {
    ItemCatalog catalog;
    std::optional<InteractionLog> train;
    std::optional<PopularityTable> popularity;
    std::optional<CoScorer> collab;
    std::optional<EmbeddingMatrixf> items;
    std::unique_ptr<EmbeddingProvider> provider;
    std::unique_ptr<Bm25Index> bm25;
    std::unique_ptr<Generator> generator;
    Pipeline pipeline;
};

// Flag checks that need no input files, so usage errors surface before data errors.
void check_pipeline_flags(const PipelineFlags& f, bool need_generator) {
    const Strategy strategy = parse_strategy(f.strategy);
    const Injection injection = parse_injection(f.inject);
    if (injection == Injection::popularity && f.train.empty()) throw UsageError("--inject pop requires --train");
    if (injection == Injection::collaborative && f.scorer.empty()) {
        throw UsageError("--inject collab requires --scorer");
    }
    if (strategy == Strategy::l2 && f.emb.empty()) throw UsageError("--emb is required for l2 grounding");
    if (need_generator) {
        static const std::set<std::string> known{"oracle", "pop", "ngram", "most-pop"};
        if (!known.contains(f.generator)) throw UsageError("unknown generator '" + f.generator + "'");
        if (f.generator == "pop" && f.train.empty()) throw UsageError("--generator pop requires --train");
    }
}

std::unique_ptr<LoadedPipeline> load_pipeline(const PipelineFlags& f, bool need_generator,
                                              std::map<std::string, std::string>& inputs) {
    check_pipeline_flags(f, need_generator);
    auto lp = std::make_unique<LoadedPipeline>();
    lp->catalog = parse_catalog(f.catalog);
    inputs[f.catalog] = file_digest(f.catalog);
    auto& p = lp->pipeline;
    p.catalog = &lp->catalog;
    p.strategy = parse_strategy(f.strategy);
    p.grounding.injection = parse_injection(f.inject);
    p.grounding.gamma = f.gamma;
    p.grounding.normalize_embeddings = f.normalize;

    if (!f.train.empty()) {
        lp->train = parse_interactions(f.train);
        inputs[f.train] = file_digest(f.train);
        lp->popularity = compute_popularity(*lp->train, lp->catalog);
        p.popularity = &*lp->popularity;
    }
    if (p.grounding.injection == Injection::popularity && !lp->popularity) {
        throw UsageError("--inject pop requires --train");
    }
    if (!f.scorer.empty()) {
        lp->collab = read_scorer(f.scorer, lp->catalog.size(), f.alpha);
        inputs[f.scorer] = file_digest(f.scorer);
        p.collab = &*lp->collab;
    }
    if (p.grounding.injection == Injection::collaborative && !lp->collab) {
        throw UsageError("--inject collab requires --scorer");
    }

    if (p.strategy == Strategy::l2) {
        if (f.emb.empty()) throw UsageError("--emb is required for l2 grounding");
        lp->items = load_embeddings(f.emb, lp->catalog);
        inputs[f.emb] = file_digest(f.emb);
        if (f.normalize) normalize_rows(*lp->items);
        lp->provider = std::make_unique<HashEmbeddingProvider>(lp->items->cols(), f.embed_seed);
        p.items = &*lp->items;
        p.provider = lp->provider.get();
    } else {
        lp->bm25 = std::make_unique<Bm25Index>(lp->catalog, Bm25Params{f.k1, f.b});
        p.bm25 = lp->bm25.get();
    }

    if (need_generator) {
        if (f.generator == "oracle") {
            lp->generator = std::make_unique<OracleEchoGenerator>(lp->catalog);
        } else if (f.generator == "pop") {
            if (!lp->popularity) throw UsageError("--generator pop requires --train");
            lp->generator = std::make_unique<PopTitleGenerator>(*lp->popularity, lp->catalog);
        } else if (f.generator == "ngram") {
            std::vector<Tokens> titles;
            for (const auto& e : lp->catalog.entries()) titles.push_back(tokenize(e.title));
            lp->generator = std::make_unique<NGramGenerator>(train_ngram(titles, f.order), lp->catalog, f.seed);
        } else {
            throw UsageError("unknown generator '" + f.generator + "'");
        }
        p.generator = lp->generator.get();
    }
    return lp;
}

// Builds the generator named on the command line for `generate`.
std::unique_ptr<Generator> make_generator(const std::string& name, const ItemCatalog& catalog,
                                          const PopularityTable* table, std::size_t order, std::uint64_t seed) {
    if (name == "oracle") return std::make_unique<OracleEchoGenerator>(catalog);
    if (name == "pop") {
        if (!table) throw UsageError("--generator pop requires --train");
        return std::make_unique<PopTitleGenerator>(*table, catalog);
    }
    if (name == "ngram") {
        std::vector<Tokens> titles;
        for (const auto& e : catalog.entries()) titles.push_back(tokenize(e.title));
        return std::make_unique<NGramGenerator>(train_ngram(titles, order), catalog, seed);
    }
    throw UsageError("unknown generator '" + name + "'");
}

RunManifest make_manifest(const CLI::App* sub, const std::vector<std::string>& args) {
    RunManifest m;
    m.command = sub->get_name();
    m.argv.assign(args.begin() + 1, args.end());
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_name(false, true);
        if (name.empty() || name == "--help" || name == "-h") continue;
        if (opt->count() > 0) {
            std::string joined;
            for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
            m.flags[name] = joined.empty() ? "true" : joined;
        } else if (!opt->get_default_str().empty()) {
            m.flags[name] = opt->get_default_str();
        }
    }
    return m;
}

std::string split_meta(const SplitLog& split, const InteractionLog& log, const ParseStats& stats,
                       std::size_t valid_samples, std::size_t test_samples, std::size_t valid_kept,
                       std::size_t test_kept, std::uint64_t seed) {
    std::ostringstream out;
    out << "records=" << log.size() << "\n";
    out << "rejected_lines=" << stats.rejected << "\n";
    out << "period_sizes=";
    for (std::size_t k = 0; k < 10; ++k) out << (k ? "," : "") << split.period_sizes[k];
    out << "\nboundaries=";
    for (std::size_t k = 0; k < 9; ++k) out << (k ? "," : "") << split.boundaries[k];
    out << "\nboundary_timestamps=";
    for (std::size_t k = 0; k < 9; ++k) out << (k ? "," : "") << log[split.boundaries[k]].timestamp;
    out << "\ntrain=" << split.train.size() << "\nvalid=" << split.valid.size() << "\ntest=" << split.test.size()
        << "\nvalid_samples=" << valid_samples << "\ntest_samples=" << test_samples
        << "\nvalid_samples_kept=" << valid_kept << "\ntest_samples_kept=" << test_kept << "\nsampler="
        << kSamplerName << "\nseed=" << seed << "\n";
    return out.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"groundrec: ground generated item descriptions onto a catalog and evaluate all-ranking metrics"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // split
    auto* split_cmd = app.add_subcommand("split", "Temporal 8:1:1 split and next-item samples");
    std::string interactions_path, split_out;
    std::uint64_t split_seed = 0;
    std::size_t eval_samples = 5000;
    split_cmd->add_option("--interactions", interactions_path, "Interactions TSV")->required();
    split_cmd->add_option("--out", split_out, "Output directory")->required();
    split_cmd->add_option("--seed", split_seed, "Seed for evaluation-sample subsampling")->required();
    split_cmd->add_option("--eval-samples", eval_samples, "Samples kept per valid/test partition")
        ->capture_default_str();

    // popularity
    auto* pop_cmd = app.add_subcommand("popularity", "Per-item popularity factors");
    std::string pop_train, pop_catalog, pop_out, pop_deciles;
    pop_cmd->add_option("--train", pop_train, "Training interactions")->required();
    pop_cmd->add_option("--catalog", pop_catalog, "Catalog TSV")->required();
    pop_cmd->add_option("--out", pop_out, "popularity.tsv")->required();
    pop_cmd->add_option("--deciles", pop_deciles, "Also write the popularity-decile share table");

    // embed
    auto* embed_cmd = app.add_subcommand("embed", "Embed catalog titles");
    std::string embed_catalog_path, embed_provider = "hash", embed_out, embed_format = "bin";
    Eigen::Index embed_dim = 256;
    std::uint64_t embed_seed = 17;
    bool embed_normalize = false;
    embed_cmd->add_option("--catalog", embed_catalog_path, "Catalog TSV")->required();
    embed_cmd->add_option("--provider", embed_provider, "hash")->capture_default_str();
    embed_cmd->add_option("--dim", embed_dim, "Embedding dimension")->capture_default_str();
    embed_cmd->add_option("--seed", embed_seed, "Hash seed")->capture_default_str();
    embed_cmd->add_option("--format", embed_format, "bin|tsv")->capture_default_str();
    embed_cmd->add_flag("--normalize", embed_normalize, "Unit-normalize rows");
    embed_cmd->add_option("--out", embed_out, "Output file")->required();

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "Run a toy generator over samples");
    std::string gen_samples, gen_generator = "oracle", gen_catalog, gen_train, gen_out;
    std::size_t gen_order = 1;
    std::uint64_t gen_seed = 0;
    gen_cmd->add_option("--samples", gen_samples, "Samples file from split")->required();
    gen_cmd->add_option("--generator", gen_generator, "oracle|pop|ngram")->capture_default_str();
    gen_cmd->add_option("--catalog", gen_catalog, "Catalog TSV")->required();
    gen_cmd->add_option("--train", gen_train, "Training interactions (pop generator)");
    gen_cmd->add_option("--order", gen_order, "N-gram order")->capture_default_str();
    gen_cmd->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
    gen_cmd->add_option("--out", gen_out, "gen.tsv")->required();

    // collab-fit
    auto* collab_cmd = app.add_subcommand("collab-fit", "Fit the co-occurrence scorer");
    std::string collab_train, collab_catalog, collab_out;
    collab_cmd->add_option("--train", collab_train, "Training interactions")->required();
    collab_cmd->add_option("--catalog", collab_catalog, "Catalog TSV")->required();
    collab_cmd->add_option("--out", collab_out, "scorer.bin")->required();

    // ground
    auto* ground_cmd = app.add_subcommand("ground", "Rank the catalog for generated texts");
    PipelineFlags ground_flags;
    ground_flags.threads = default_threads();
    std::string ground_gen, ground_out, ground_samples;
    std::size_t ground_topk = 20;
    add_pipeline_flags(ground_cmd, ground_flags, true);
    ground_cmd->add_option("--gen", ground_gen, "gen.tsv")->required();
    ground_cmd->add_option("--samples", ground_samples, "Samples (exclusions, collaborative history)");
    ground_cmd->add_option("--topk", ground_topk, "Items written per sample")->capture_default_str();
    ground_cmd->add_option("--out", ground_out, "ranks.tsv")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "All-ranking HR/NDCG evaluation");
    PipelineFlags eval_flags;
    eval_flags.threads = default_threads();
    std::string eval_test, eval_out, eval_dump;
    bool eval_json = false;
    std::size_t eval_dump_top = 20;
    add_pipeline_flags(eval_cmd, eval_flags, true);
    eval_cmd->add_option("--test", eval_test, "Samples file")->required();
    eval_cmd->add_option("--out", eval_out, "Report file (stdout when omitted)");
    eval_cmd->add_flag("--json", eval_json, "Write the report as JSON");
    eval_cmd->add_option("--dump-ranks", eval_dump, "Write per-sample top items");
    eval_cmd->add_option("--dump-top", eval_dump_top, "Items per sample in --dump-ranks")->capture_default_str();

    // tune-gamma
    auto* tune_cmd = app.add_subcommand("tune-gamma", "Grid search the injection exponent");
    PipelineFlags tune_flags;
    tune_flags.threads = default_threads();
    std::string tune_valid, tune_metric = "ndcg@20", tune_out;
    add_pipeline_flags(tune_cmd, tune_flags, false);
    tune_cmd->add_option("--valid", tune_valid, "Validation samples file")->required();
    tune_cmd->add_option("--metric", tune_metric, "Selection metric")->capture_default_str();
    tune_cmd->add_option("--out", tune_out, "sweep.tsv")->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "Compare reports or compute Improve2LV");
    std::vector<std::string> report_files;
    std::string report_mode = "compare", report_out;
    bool report_force = false;
    report_cmd->add_option("reports", report_files, "Report files")->required()->expected(2, -1);
    report_cmd->add_option("--mode", report_mode, "compare|improve2lv")->capture_default_str();
    report_cmd->add_flag("--force", report_force, "Allow reports from different sample sets");
    report_cmd->add_option("--out", report_out, "Also write the table as TSV");

    // replay
    auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    std::string replay_manifest;
    replay_cmd->add_option("manifest", replay_manifest, "Manifest JSON")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (split_cmd->parsed()) {
            ParseStats stats;
            const InteractionLog log = parse_interactions(interactions_path, &stats);
            const SplitLog split = temporal_split(log);
            const fs::path dir(split_out);
            write_interactions(dir / "train.tsv", split.train);
            write_interactions(dir / "valid.tsv", split.valid);
            write_interactions(dir / "test.tsv", split.test);
            const auto valid_all = build_samples(log, split, Partition::valid);
            const auto test_all = build_samples(log, split, Partition::test);
            const auto valid_kept = sample_eval(valid_all, eval_samples, split_seed);
            const auto test_kept = sample_eval(test_all, eval_samples, split_seed + 1);
            write_samples(dir / "valid.samples.tsv", valid_kept);
            write_samples(dir / "test.samples.tsv", test_kept);
            write_file(dir / "split.meta", split_meta(split, log, stats, valid_all.size(), test_all.size(),
                                                      valid_kept.size(), test_kept.size(), split_seed));
            auto m = make_manifest(split_cmd, args);
            m.input_digests[interactions_path] = file_digest(interactions_path);
            m.seeds["sample"] = std::to_string(split_seed);
            write_manifest(dir / "manifest.json", m);
            err << "split: " << log.size() << " records (" << stats.rejected << " rejected lines), "
                << valid_kept.size() << " valid / " << test_kept.size() << " test samples\n";
        } else if (pop_cmd->parsed()) {
            const auto catalog = parse_catalog(pop_catalog);
            const auto train = parse_interactions(pop_train);
            const auto table = compute_popularity(train, catalog);
            write_popularity(pop_out, table, catalog);
            if (!pop_deciles.empty()) write_deciles(pop_deciles, decile_report(table), table);
            auto m = make_manifest(pop_cmd, args);
            m.input_digests[pop_train] = file_digest(pop_train);
            m.input_digests[pop_catalog] = file_digest(pop_catalog);
            write_manifest(manifest_path_for(pop_out), m);
            if (table.unknown_items) err << "popularity: " << table.unknown_items << " records reference unknown items\n";
        } else if (embed_cmd->parsed()) {
            if (embed_provider != "hash") throw UsageError("unknown provider '" + embed_provider + "' (hash)");
            if (embed_format != "bin" && embed_format != "tsv") throw UsageError("--format must be bin or tsv");
            const auto catalog = parse_catalog(embed_catalog_path);
            const HashEmbeddingProvider provider(embed_dim, embed_seed);
            auto m = embed_catalog(catalog, provider);
            if (embed_normalize) normalize_rows(m);
            if (embed_format == "bin") {
                write_embeddings_bin(embed_out, m);
            } else {
                write_embeddings_tsv(embed_out, m, catalog);
            }
            auto man = make_manifest(embed_cmd, args);
            man.input_digests[embed_catalog_path] = file_digest(embed_catalog_path);
            man.seeds["embed"] = std::to_string(embed_seed);
            write_manifest(manifest_path_for(embed_out), man);
        } else if (gen_cmd->parsed()) {
            const auto catalog = parse_catalog(gen_catalog);
            const auto samples = read_samples(gen_samples);
            std::optional<PopularityTable> table;
            auto man = make_manifest(gen_cmd, args);
            if (!gen_train.empty()) {
                table = compute_popularity(parse_interactions(gen_train), catalog);
                man.input_digests[gen_train] = file_digest(gen_train);
            }
            const auto generator = make_generator(gen_generator, catalog, table ? &*table : nullptr, gen_order, gen_seed);
            std::vector<GeneratedRow> rows;
            for (std::size_t s = 0; s < samples.size(); ++s) {
                const auto g = generator->generate(samples[s]);
                rows.push_back({s, g.text(), g.source});
            }
            write_generated(gen_out, rows);
            man.input_digests[gen_samples] = file_digest(gen_samples);
            man.input_digests[gen_catalog] = file_digest(gen_catalog);
            man.seeds["generator"] = std::to_string(gen_seed);
            write_manifest(manifest_path_for(gen_out), man);
        } else if (collab_cmd->parsed()) {
            const auto catalog = parse_catalog(collab_catalog);
            const auto scorer = fit_cooccurrence(parse_interactions(collab_train), catalog);
            write_scorer(collab_out, scorer);
            auto man = make_manifest(collab_cmd, args);
            man.input_digests[collab_train] = file_digest(collab_train);
            man.input_digests[collab_catalog] = file_digest(collab_catalog);
            write_manifest(manifest_path_for(collab_out), man);
        } else if (ground_cmd->parsed()) {
            std::map<std::string, std::string> inputs;
            auto lp = load_pipeline(ground_flags, false, inputs);
            const auto& p = lp->pipeline;
            const auto rows = read_generated(ground_gen);
            inputs[ground_gen] = file_digest(ground_gen);
            std::vector<SequenceSample> samples;
            if (!ground_samples.empty()) {
                samples = read_samples(ground_samples);
                inputs[ground_samples] = file_digest(ground_samples);
            }
            if (p.grounding.injection == Injection::collaborative && samples.empty()) {
                throw UsageError("--inject collab requires --samples");
            }
            std::string table = "# sample\trank\titem_id\tscore\n";
            for (const auto& row : rows) {
                const SequenceSample* sample = nullptr;
                if (!samples.empty()) {
                    if (row.sample_index >= samples.size()) throw DataError("gen.tsv references a missing sample");
                    sample = &samples[row.sample_index];
                }
                const auto exclusions = sample ? known_indices(*sample, lp->catalog) : std::vector<ItemIndex>{};
                const Tokens tokens = tokenize(row.text);
                RankedList ranked;
                if (p.strategy == Strategy::bm25) {
                    ranked = bm25_rank(*p.bm25, tokens, exclusions);
                    if (!ranked.warning.empty()) err << "sample " << row.sample_index << ": " << ranked.warning << "\n";
                } else {
                    EmbeddingVectorf oracle = p.provider->embed(tokens);
                    if (p.grounding.normalize_embeddings && oracle.norm() > 0) oracle.normalize();
                    Eigen::VectorXd weights;
                    if (p.grounding.injection == Injection::popularity) weights = p.popularity->normalized;
                    if (p.grounding.injection == Injection::collaborative) weights = injection_weights(p, *sample);
                    ranked = ground_l2(*p.items, oracle, p.grounding,
                                       p.grounding.injection == Injection::none ? nullptr : &weights, exclusions);
                }
                const std::size_t keep = std::min(ground_topk, ranked.size());
                for (std::size_t r = 0; r < keep; ++r) {
                    table += std::to_string(row.sample_index) + "\t" + std::to_string(r + 1) + "\t" +
                             lp->catalog.item_id(ranked.items[r]) + "\t" + format_double(ranked.scores[r]) + "\n";
                }
            }
            write_file(ground_out, table);
            auto man = make_manifest(ground_cmd, args);
            man.input_digests = inputs;
            write_manifest(manifest_path_for(ground_out), man);
        } else if (eval_cmd->parsed()) {
            std::map<std::string, std::string> inputs;
            const bool most_pop = eval_flags.generator == "most-pop";
            if (most_pop && eval_flags.train.empty()) throw UsageError("--generator most-pop requires --train");
            if (!most_pop) check_pipeline_flags(eval_flags, true);
            const auto samples = read_samples(eval_test);
            inputs[eval_test] = file_digest(eval_test);
            MetricsReport report;
            std::string dump;
            if (most_pop) {
                const auto catalog = parse_catalog(eval_flags.catalog);
                inputs[eval_flags.catalog] = file_digest(eval_flags.catalog);
                const auto table = compute_popularity(parse_interactions(eval_flags.train), catalog);
                inputs[eval_flags.train] = file_digest(eval_flags.train);
                report = most_pop_baseline(table, catalog, samples);
            } else {
                auto lp = load_pipeline(eval_flags, true, inputs);
                EvalOptions opts;
                opts.threads = eval_flags.threads;
                opts.keep_top = eval_dump.empty() ? 0 : eval_dump_top;
                auto result = evaluate(samples, lp->pipeline, opts);
                report = std::move(result.report);
                report.fingerprint["seed"] = std::to_string(eval_flags.seed);
                if (!eval_dump.empty()) {
                    dump = "# sample\ttarget_rank\trank\titem_id\tscore\n";
                    for (std::size_t s = 0; s < result.outcomes.size(); ++s) {
                        const auto& o = result.outcomes[s];
                        if (o.skipped) {
                            dump += std::to_string(s) + "\tskipped\n";
                            continue;
                        }
                        for (std::size_t r = 0; r < o.top.size(); ++r) {
                            dump += std::to_string(s) + "\t" + std::to_string(o.position) + "\t" +
                                    std::to_string(r + 1) + "\t" + lp->catalog.item_id(o.top.items[r]) + "\t" +
                                    format_double(o.top.scores[r]) + "\n";
                        }
                    }
                }
            }
            const std::string text = eval_json ? format_report_json(report) : format_report(report);
            if (eval_out.empty()) {
                out << text;
            } else {
                write_file(eval_out, text);
            }
            if (!eval_dump.empty()) write_file(eval_dump, dump);
            if (report.n_skipped) err << "eval: skipped " << report.n_skipped << " samples whose target was already known\n";
            if (!eval_out.empty()) {
                auto man = make_manifest(eval_cmd, args);
                man.input_digests = inputs;
                man.seeds["generator"] = std::to_string(eval_flags.seed);
                man.seeds["embed"] = std::to_string(eval_flags.embed_seed);
                write_manifest(manifest_path_for(eval_out), man);
            }
        } else if (tune_cmd->parsed()) {
            std::map<std::string, std::string> inputs;
            auto lp = load_pipeline(tune_flags, true, inputs);
            const auto valid = read_samples(tune_valid);
            inputs[tune_valid] = file_digest(tune_valid);
            TuneOptions opts;
            opts.metric = tune_metric;
            opts.threads = tune_flags.threads;
            const auto result = tune_gamma(valid, lp->pipeline, opts);
            write_file(tune_out, format_sweep(result));
            out << "best_gamma\t" << format_double(result.best_gamma) << "\n";
            auto man = make_manifest(tune_cmd, args);
            man.input_digests = inputs;
            man.seeds["generator"] = std::to_string(tune_flags.seed);
            man.seeds["embed"] = std::to_string(tune_flags.embed_seed);
            write_manifest(manifest_path_for(tune_out), man);
        } else if (report_cmd->parsed()) {
            std::vector<MetricsReport> reports;
            for (const auto& f : report_files) reports.push_back(read_report(f));
            std::string table;
            if (report_mode == "compare") {
                table = "metric";
                for (std::size_t r = 0; r < reports.size(); ++r) table += "\treport" + std::to_string(r);
                for (std::size_t r = 1; r < reports.size(); ++r) table += "\tdelta" + std::to_string(r);
                table += "\n";
                for (const auto& [name, values] : compare_reports(reports, report_force)) {
                    table += name;
                    for (double v : values) table += "\t" + format_double(v);
                    for (std::size_t r = 1; r < values.size(); ++r) table += "\t" + format_double(values[r] - values[0]);
                    table += "\n";
                }
            } else if (report_mode == "improve2lv") {
                if (reports.size() != 3) throw UsageError("improve2lv needs exactly 3 reports: a b combined");
                table = "metric\timprove2lv\n";
                for (const auto& [name, v] : improve2lv(reports[0], reports[1], reports[2], report_force)) {
                    if (!v) err << "warning: " << name << " is zero in both component reports\n";
                    table += name + "\t" + (v ? format_double(*v) : "null") + "\n";
                }
            } else {
                throw UsageError("--mode must be compare or improve2lv");
            }
            out << table;
            if (!report_out.empty()) write_file(report_out, table);
        } else if (replay_cmd->parsed()) {
            return replay(replay_manifest, out, err);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

int replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
    RunManifest m;
    try {
        m = read_manifest(manifest_path);
        for (const auto& [path, digest] : m.input_digests) {
            if (file_digest(path) != digest) throw DataError("input changed since the manifest was written: " + path);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    std::vector<std::string> args{"groundrec"};
    args.insert(args.end(), m.argv.begin(), m.argv.end());
    return run(args, out, err);
}

}  // namespace groundrec::cli
