// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "groundrec/bm25.hpp"
#include "groundrec/cli.hpp"
#include "groundrec/eval.hpp"
#include "groundrec/manifest.hpp"
#include "groundrec/tune.hpp"
#include "test_support.hpp"

using namespace groundrec;
namespace gt = groundrec::testing;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

/// Random words keyed by the user id: carries no information about the target.
class RandomTextGenerator final : public Generator {
public:
    GeneratedText generate(const SequenceSample& s) const override {
        std::mt19937_64 rng(hash_token(s.user_id, 4242));
        Tokens t;
        for (int w = 0; w < 3; ++w) {
            std::string word;
            for (int c = 0; c < 6; ++c) word += static_cast<char>('a' + rng() % 26);
            t.push_back(word);
        }
        return {t, name()};
    }
    std::string name() const override { return "random-text"; }
};

/// Keeps one word of the target title and pads with noise words.
class NoisyEchoGenerator final : public Generator {
public:
    NoisyEchoGenerator(const ItemCatalog& catalog, std::vector<std::string> vocab, int noise)
        : catalog_(catalog), vocab_(std::move(vocab)), noise_(noise) {}
    GeneratedText generate(const SequenceSample& s) const override {
        std::mt19937_64 rng(hash_token(s.user_id + "/" + s.target, 99));
        const Tokens title = tokenize(catalog_.title(catalog_.index_of(s.target)));
        Tokens out{title[rng() % title.size()]};
        for (int k = 0; k < noise_; ++k) out.push_back(vocab_[rng() % vocab_.size()]);
        return {out, name()};
    }
    std::string name() const override { return "noisy-echo"; }

private:
    const ItemCatalog& catalog_;
    std::vector<std::string> vocab_;
    int noise_;
};

// 1 ------------------------------------------------------------------------
Outcome oracle_recovery() {
    const auto start = std::chrono::steady_clock::now();
    const HashEmbeddingProvider provider(256, 17);
    // Distinct titles can still share a hashed vector (one-word titles landing
    // in the same bucket), and then rank 1 is decided by the index tie-break.
    // Candidates are drawn until 500 titles with distinct vectors exist.
    std::vector<std::string> titles;
    std::set<std::vector<float>> rows;
    std::size_t dropped = 0;
    for (const auto& t : gt::distinct_titles(800, 1)) {
        if (titles.size() == 500) break;
        const auto v = provider.embed_text(t);
        if (rows.insert({v.data(), v.data() + v.size()}).second) {
            titles.push_back(t);
        } else {
            ++dropped;
        }
    }
    if (titles.size() != 500) return {false, "could not build 500 titles with distinct embeddings"};
    const auto catalog = gt::make_catalog(titles);
    const auto items = embed_catalog(catalog, provider);

    const OracleEchoGenerator gen(catalog);
    Pipeline p{&catalog, &gen, Strategy::l2, &items, &provider};
    std::vector<SequenceSample> samples;
    std::mt19937_64 rng(2);
    for (int s = 0; s < 200; ++s) {
        const auto target = catalog.item_id(static_cast<ItemIndex>(rng() % 500));
        const auto prev = catalog.item_id(static_cast<ItemIndex>(rng() % 500));
        std::set<std::string> known;
        if (prev != target) known.insert(prev);
        samples.push_back(gt::make_sample("u" + std::to_string(s), {prev}, target, known));
    }
    const auto rep = evaluate(samples, p).report;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = rep.n_samples == 200 && rep.metric("hr@1") == 1.0 && rep.metric("ndcg@1") == 1.0 && secs < 5.0;
    return {ok, "HR@1=" + fmt(rep.metric("hr@1")) + " NDCG@1=" + fmt(rep.metric("ndcg@1")) + " over " +
                    std::to_string(rep.n_samples) + " samples in " + fmt(secs) + "s (" + std::to_string(dropped) +
                    " colliding candidate titles skipped)"};
}

// 2 ------------------------------------------------------------------------
Outcome popularity_conformance() {
    std::mt19937_64 rng(3);
    std::size_t failures = 0, degenerate = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        std::vector<std::uint64_t> counts(n);
        const int kind = trial % 10;
        for (auto& c : counts) c = kind == 0 ? 7 : kind == 1 ? 0 : rng() % 1000;
        const auto t = popularity_from_counts(counts);

        double total = 0;
        for (auto c : counts) total += static_cast<double>(c);
        double lo = 1e300, hi = -1e300;
        std::vector<double> share(n);
        for (std::size_t i = 0; i < n; ++i) {
            share[i] = total > 0 ? static_cast<double>(counts[i]) / total : 0.0;
            lo = std::min(lo, share[i]);
            hi = std::max(hi, share[i]);
        }
        bool ok = true;
        if (hi > lo) {
            ok &= std::abs(t.share.sum() - 1.0) <= 1e-9;
            ok &= t.normalized.minCoeff() == 0.0 && t.normalized.maxCoeff() == 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                ok &= std::abs(t.share[i] - share[i]) <= 1e-12;
                ok &= std::abs(t.normalized[i] - (share[i] - lo) / (hi - lo)) <= 1e-12;
            }
        } else {
            ++degenerate;
            if (total > 0) ok &= std::abs(t.share.sum() - 1.0) <= 1e-9;
            ok &= t.normalized.isZero(0.0);
        }
        if (!ok) ++failures;
    }
    return {failures == 0, "1000 count vectors (" + std::to_string(degenerate) + " degenerate), " +
                               std::to_string(failures) + " failures"};
}

// 3 ------------------------------------------------------------------------
Outcome identity_and_bound() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto grid = gamma_grid();
    std::size_t identity_fail = 0, bound_fail = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 60);
        Eigen::VectorXd raw(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            raw[i] = u(rng) * 10.0;
            const auto pick = rng() % 6;
            w[i] = pick == 0 ? 0.0 : pick == 1 ? 1.0 : u(rng);
        }
        const Eigen::VectorXd dhat = normalize_distances(raw);
        const auto zero = inject(dhat, w, 0.0);
        if (std::memcmp(zero.values.data(), dhat.data(), sizeof(double) * n) != 0 ||
            rank(zero, {}).items != rank(dhat, {}).items) {
            ++identity_fail;
        }
        const double gamma = trial % 2 ? grid[rng() % grid.size()] : u(rng) * 100.0;
        const auto adj = inject(dhat, w, gamma);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double cap = adj.log_scale ? (dhat[i] == 0.0 ? -std::numeric_limits<double>::infinity()
                                                                : std::log(dhat[i]))
                                             : dhat[i];
            if (!(adj.values[i] <= cap)) {
                ++bound_fail;
                break;
            }
        }
    }
    return {identity_fail == 0 && bound_fail == 0,
            "10000 instances, identity failures " + std::to_string(identity_fail) + ", bound failures " +
                std::to_string(bound_fail)};
}

// 4 ------------------------------------------------------------------------
Outcome gamma_monotonicity() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto grid = gamma_grid();
    std::size_t violations = 0, changes = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng() % 41);
        Eigen::VectorXd raw(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            raw[i] = u(rng);
            w[i] = 0.999 * u(rng);
        }
        const Eigen::VectorXd dhat = normalize_distances(raw);
        Eigen::Index m = 0;
        do m = static_cast<Eigen::Index>(rng() % n);
        while (dhat[m] == 0.0);
        w[m] = 1.0;

        std::set<ItemIndex> prev;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto r = rank(inject(dhat, w, grid[g]), {});
            std::set<ItemIndex> above;
            for (ItemIndex it : r.items) {
                if (it == m) break;
                above.insert(it);
            }
            if (g > 0) {
                if (!std::includes(prev.begin(), prev.end(), above.begin(), above.end())) ++violations;
                if (above != prev) ++changes;
            }
            prev = std::move(above);
        }
    }
    return {violations == 0, "50 instances x 200 gammas, " + std::to_string(changes) + " rank changes, " +
                                 std::to_string(violations) + " subset violations"};
}

// 5 ------------------------------------------------------------------------
Outcome brute_force_equivalence() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto grid = gamma_grid();
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 50);
        const int dim = 1 + static_cast<int>(rng() % 8);
        const bool coarse = trial % 2 == 0;  // integer coordinates produce exact ties
        std::vector<std::vector<double>> emb(n, std::vector<double>(dim));
        Eigen::MatrixXd m(n, dim);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < dim; ++k) m(i, k) = emb[i][k] = coarse ? static_cast<double>(rng() % 3) : u(rng);
        std::vector<double> oracle(dim);
        Eigen::VectorXd o(dim);
        for (int k = 0; k < dim; ++k) o[k] = oracle[k] = coarse ? static_cast<double>(rng() % 3) : u(rng);
        const double levels[] = {0.0, 0.25, 0.5, 1.0};
        std::vector<double> w(n);
        Eigen::VectorXd we(n);
        for (int i = 0; i < n; ++i) we[i] = w[i] = coarse ? levels[rng() % 4] : u(rng);
        std::vector<bool> excluded(n, false);
        std::vector<ItemIndex> ex;
        for (int i = 0; i < n; ++i) {
            if (rng() % 6 == 0 && static_cast<int>(ex.size()) + 1 < n) {
                excluded[i] = true;
                ex.push_back(static_cast<ItemIndex>(i));
            }
        }
        const double gamma = grid[rng() % grid.size()];
        const auto got = ground_l2(m, o, {Injection::popularity, gamma, false}, &we, ex);
        const auto want = gt::naive_ground(emb, oracle, w, gamma, excluded);
        if (std::vector<std::size_t>(got.items.begin(), got.items.end()) != want) ++mismatches;
    }
    return {mismatches == 0, "100 instances, " + std::to_string(mismatches) + " mismatches"};
}

// 6 ------------------------------------------------------------------------
Outcome metric_oracles() {
    std::size_t table_fail = 0, prop_fail = 0;
    // 1 / log2(r + 1) at the ranks where it is exact
    const std::map<std::size_t, double> exact{{1, 1.0}, {3, 0.5}, {7, 1.0 / 3.0}, {15, 0.25}};
    for (std::size_t r = 1; r <= 25; ++r) {
        for (std::size_t k : kDefaultKs) {
            const int hr = r <= k ? 1 : 0;
            const double nd = r <= k ? std::log(2.0) / std::log(static_cast<double>(r) + 1.0) : 0.0;
            if (hr_at_k(r, k) != hr || std::abs(ndcg_at_k(r, k) - nd) > 1e-15) ++table_fail;
            if (auto it = exact.find(r); it != exact.end() && r <= k && ndcg_at_k(r, k) != it->second) ++table_fail;
        }
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 40);
        Eigen::VectorXd keys(n);
        for (Eigen::Index i = 0; i < n; ++i) keys[i] = u(rng);
        const auto r = rank(keys, {});
        const auto target = static_cast<ItemIndex>(rng() % n);
        double prev_h = 0, prev_n = 0;
        for (std::size_t k : kDefaultKs) {
            const double h = hr_at_k(r, target, k), nd = ndcg_at_k(r, target, k);
            if (nd > h || h < prev_h || nd < prev_n) ++prop_fail;
            prev_h = h;
            prev_n = nd;
        }
    }
    return {table_fail == 0 && prop_fail == 0, "25x5 table failures " + std::to_string(table_fail) +
                                                   ", 10000 random rankings failures " + std::to_string(prop_fail)};
}

// 7 ------------------------------------------------------------------------
Outcome null_model() {
    const auto catalog = gt::make_catalog(gt::distinct_titles(100, 70));
    const HashEmbeddingProvider provider(256, 17);
    const auto items = embed_catalog(catalog, provider);
    const RandomTextGenerator gen;
    Pipeline p{&catalog, &gen, Strategy::l2, &items, &provider};
    const std::size_t n = 4000;
    std::mt19937_64 rng(71);
    std::vector<SequenceSample> samples;
    for (std::size_t s = 0; s < n; ++s) {
        const auto target = catalog.item_id(static_cast<ItemIndex>(rng() % 100));
        samples.push_back(gt::make_sample("user" + std::to_string(s), {catalog.item_id(0)}, target));
    }
    const double hr = evaluate(samples, p).report.metric("hr@10");
    const double half = 2.5758293035489 * std::sqrt(0.1 * 0.9 / static_cast<double>(n));
    const bool ok = std::abs(hr - 0.1) <= half;
    return {ok, "HR@10=" + fmt(hr) + " over " + std::to_string(n) + " samples, 99% CI [" + fmt(0.1 - half) + ", " +
                    fmt(0.1 + half) + "]"};
}

// 8 ------------------------------------------------------------------------
Outcome temporal_leakage() {
    const auto catalog = parse_catalog(gt::fixture_dir() / "catalog.tsv");
    const auto log = parse_interactions(gt::fixture_dir() / "interactions.tsv");
    const auto split = temporal_split(log);
    const auto test = build_samples(log, split, Partition::test);
    std::int64_t train_max = std::numeric_limits<std::int64_t>::min();
    for (const auto& r : split.train.records()) train_max = std::max(train_max, r.timestamp);
    std::size_t early = 0;
    for (const auto& s : test) {
        if (s.target_timestamp < train_max) ++early;
    }

    const HashEmbeddingProvider provider(256, 17);
    const auto items = embed_catalog(catalog, provider);
    const auto pop = compute_popularity(split.train, catalog);
    const auto scorer = fit_cooccurrence(split.train, catalog, 0.1);
    const Bm25Index bm25(catalog);
    std::vector<Tokens> titles;
    for (const auto& e : catalog.entries()) titles.push_back(tokenize(e.title));
    const NGramGenerator gen(train_ngram(titles, 1), catalog, 3);

    std::size_t leaked = 0, lists = 0;
    auto audit = [&](const Pipeline& p) {
        const auto res = evaluate(test, p, {kDefaultKs, 1, catalog.size()});
        for (std::size_t s = 0; s < test.size(); ++s) {
            if (res.outcomes[s].skipped) continue;
            ++lists;
            for (ItemIndex it : res.outcomes[s].top.items) {
                if (test[s].known_items.contains(catalog.item_id(it))) ++leaked;
            }
        }
    };
    audit({&catalog, &gen, Strategy::l2, &items, &provider, {Injection::popularity, 2.0, false}, &pop});
    audit({&catalog, &gen, Strategy::l2, &items, &provider, {Injection::collaborative, 2.0, false}, &pop, &scorer});
    Pipeline b{&catalog, &gen, Strategy::bm25};
    b.bm25 = &bm25;
    audit(b);
    return {early == 0 && leaked == 0 && !test.empty(),
            std::to_string(test.size()) + " test samples, " + std::to_string(early) + " before train end; " +
                std::to_string(lists) + " full ranked lists, " + std::to_string(leaked) + " excluded items present"};
}

// 9 ------------------------------------------------------------------------
Outcome grid_exactness() {
    const auto g = gamma_grid();
    bool ok = g.size() == 200 && g[0] == 0.0 && g[1] == 0.01 && g[2] == 0.02 && g.back() == 100.0;
    for (std::size_t i = 1; ok && i < g.size(); ++i) ok = g[i] > g[i - 1];
    return {ok, std::to_string(g.size()) + " values, first " + fmt(g[0]) + "/" + fmt(g[1]) + "/" + fmt(g[2]) +
                    ", last " + fmt(g.back())};
}

// 10 -----------------------------------------------------------------------
Outcome popularity_effect() {
    // 400 items, three-word titles over a 40-word vocabulary; popularity is
    // Zipf-like and targets are drawn in proportion to it.
    std::mt19937_64 rng(10);
    std::vector<std::string> vocab;
    for (int w = 0; w < 40; ++w) vocab.push_back("w" + std::to_string(w));
    std::set<std::string> seen;
    std::vector<std::string> titles;
    while (titles.size() < 400) {
        const std::string t = vocab[rng() % 40] + " " + vocab[rng() % 40] + " " + vocab[rng() % 40];
        if (seen.insert(t).second) titles.push_back(t);
    }
    const auto catalog = gt::make_catalog(titles);
    std::vector<double> weight(catalog.size());
    std::vector<ItemIndex> perm(catalog.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t r = 0; r < perm.size(); ++r) weight[perm[r]] = 1.0 / std::pow(static_cast<double>(r) + 1.0, 1.1);
    std::discrete_distribution<ItemIndex> draw(weight.begin(), weight.end());

    std::vector<Interaction> train;
    for (int i = 0; i < 20000; ++i) train.push_back({"t" + std::to_string(i % 500), catalog.item_id(draw(rng)), i, {}});
    const auto pop = compute_popularity(InteractionLog(train), catalog);

    auto make = [&](const std::string& prefix, std::size_t n) {
        std::vector<SequenceSample> out;
        for (std::size_t s = 0; s < n; ++s) {
            out.push_back(gt::make_sample(prefix + std::to_string(s), {catalog.item_id(0)}, catalog.item_id(draw(rng))));
        }
        return out;
    };
    const auto valid = make("v", 1000);
    const auto test = make("s", 2000);

    const HashEmbeddingProvider provider(256, 17);
    const auto items = embed_catalog(catalog, provider);
    const NoisyEchoGenerator gen(catalog, vocab, 2);
    Pipeline plain{&catalog, &gen, Strategy::l2, &items, &provider, {Injection::none, 0.0, false}, &pop};
    Pipeline injected = plain;
    injected.grounding.injection = Injection::popularity;
    injected.grounding.gamma = tune_gamma(valid, injected).best_gamma;

    const auto a = evaluate(test, plain).report;
    const auto b = evaluate(test, injected).report;
    const double dn20 = b.metric("ndcg@20") - a.metric("ndcg@20"), dh20 = b.metric("hr@20") - a.metric("hr@20");
    const double dn1 = b.metric("ndcg@1") - a.metric("ndcg@1"), dh1 = b.metric("hr@1") - a.metric("hr@1");
    const bool ok = dn20 > 0 && dh20 > 0 && dh20 >= dh1 && dn20 >= dn1;
    return {ok, "gamma=" + fmt(injected.grounding.gamma) + " NDCG@20 " + fmt(a.metric("ndcg@20")) + "->" +
                    fmt(b.metric("ndcg@20")) + ", HR@20 " + fmt(a.metric("hr@20")) + "->" + fmt(b.metric("hr@20")) +
                    ", HR@1 " + fmt(a.metric("hr@1")) + "->" + fmt(b.metric("hr@1")) + ", NDCG@1 " +
                    fmt(a.metric("ndcg@1")) + "->" + fmt(b.metric("ndcg@1"))};
}

// 11 -----------------------------------------------------------------------
Outcome bm25_noise() {
    const auto catalog = gt::make_catalog({"Iron Man", "Iron Giant", "Iron Lady", "Iron Monkey", "Rain Man",
                                           "Spider Man", "Man on Fire", "Sichuan Opera"});
    const ItemIndex right = 0;
    // Right title plus one stray token that only the wrong title contains.
    const Tokens query = tokenize("Iron Man Sichuan");
    const Bm25Index bm25(catalog);
    const auto by_bm25 = bm25_rank(bm25, query, {});
    const HashEmbeddingProvider provider(256, 17);
    const auto items = embed_catalog(catalog, provider);
    const auto by_l2 = ground_l2(items, provider.embed(query), {}, nullptr, {});
    const ItemIndex bm25_choice = by_bm25.items.front();
    const bool ok = bm25_choice != right && *by_l2.position_of(right) < *by_l2.position_of(bm25_choice);
    return {ok, "BM25 top '" + catalog.title(bm25_choice) + "', L2 top '" + catalog.title(by_l2.items.front()) +
                    "', L2 positions right=" + std::to_string(*by_l2.position_of(right)) +
                    " bm25-choice=" + std::to_string(*by_l2.position_of(bm25_choice))};
}

// 12 -----------------------------------------------------------------------
struct CliRun {
    int code;
    std::string err;
};

CliRun cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), "groundrec");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, err.str()};
}

Outcome cli_determinism() {
    const auto dir = gt::temp_dir("acceptance_cli");
    const auto d = [&](const std::string& f) { return (dir / f).string(); };
    const std::string catalog = (gt::fixture_dir() / "catalog.tsv").string();
    const std::string interactions = (gt::fixture_dir() / "interactions.tsv").string();

    struct Step {
        std::vector<std::string> args;
        std::vector<std::string> outputs;
        std::string manifest;
    };
    const std::vector<std::string> pipe{"--catalog", catalog, "--emb", d("emb.bin"), "--train", d("train.tsv")};
    auto plus = [&](std::vector<std::string> head, const std::vector<std::string>& tail) {
        head.insert(head.end(), pipe.begin(), pipe.end());
        head.insert(head.end(), tail.begin(), tail.end());
        return head;
    };
    const std::vector<Step> steps{
        {{"split", "--interactions", interactions, "--out", d("split"), "--seed", "11"},
         {"split/train.tsv", "split/valid.tsv", "split/test.tsv", "split/valid.samples.tsv", "split/test.samples.tsv",
          "split/split.meta"},
         "split/manifest.json"},
        {{"popularity", "--train", d("split/train.tsv"), "--catalog", catalog, "--out", d("pop.tsv"), "--deciles",
          d("deciles.tsv")},
         {"pop.tsv", "deciles.tsv"},
         "pop.tsv.manifest.json"},
        {{"embed", "--catalog", catalog, "--out", d("emb.bin")}, {"emb.bin"}, "emb.bin.manifest.json"},
        {{"collab-fit", "--train", d("split/train.tsv"), "--catalog", catalog, "--out", d("scorer.bin")},
         {"scorer.bin"},
         "scorer.bin.manifest.json"},
        {{"generate", "--samples", d("split/test.samples.tsv"), "--generator", "ngram", "--catalog", catalog, "--out",
          d("gen.tsv")},
         {"gen.tsv"},
         "gen.tsv.manifest.json"},
    };

    std::vector<std::string> problems;
    auto snapshot = [&](const std::vector<std::string>& files) {
        std::vector<std::string> bytes;
        for (const auto& f : files) bytes.push_back(read_file(dir / f));
        return bytes;
    };
    auto check_replay = [&](const std::string& label, const std::vector<std::string>& files,
                            const std::string& manifest) {
        const auto before = snapshot(files);
        const auto r = cli_run({"replay", d(manifest)});
        if (r.code != 0) {
            problems.push_back(label + " replay exit " + std::to_string(r.code) + ": " + r.err);
            return;
        }
        if (snapshot(files) != before) problems.push_back(label + " replay differs");
    };

    std::size_t checked = 0;
    try {
        for (const auto& st : steps) {
            const auto r = cli_run(st.args);
            if (r.code != 0) {
                problems.push_back(st.args[0] + " exit " + std::to_string(r.code) + ": " + r.err);
                continue;
            }
            check_replay(st.args[0], st.outputs, st.manifest);
            ++checked;
        }
        // The remaining commands read train.tsv from the split directory.
        for (const char* f : {"train.tsv"}) std::filesystem::copy_file(d(std::string("split/") + f), d(f),
                                                                       std::filesystem::copy_options::overwrite_existing);
        struct Threaded {
            std::string name;
            std::vector<std::string> args;
            std::string output;
        };
        const std::vector<Threaded> threaded{
            {"ground", plus({"ground"}, {"--gen", d("gen.tsv"), "--samples", d("split/test.samples.tsv"), "--inject",
                                         "collab", "--scorer", d("scorer.bin"), "--gamma", "1.5"}),
             "ranks"},
            {"eval", plus({"eval"}, {"--generator", "ngram", "--inject", "pop", "--gamma", "4", "--test",
                                     d("split/test.samples.tsv"), "--dump-ranks", "DUMP"}),
             "report"},
            {"tune-gamma", plus({"tune-gamma"}, {"--generator", "ngram", "--inject", "pop", "--valid",
                                                 d("split/valid.samples.tsv")}),
             "sweep"},
        };
        for (const auto& t : threaded) {
            std::vector<std::string> outputs;
            for (const char* threads : {"1", "8"}) {
                const std::string out = t.output + "." + threads;
                auto args = t.args;
                for (auto& a : args) {
                    if (a == "DUMP") a = d(out + ".dump");
                }
                args.insert(args.end(), {"--threads", threads, "--out", d(out)});
                const auto r = cli_run(args);
                if (r.code != 0) {
                    problems.push_back(t.name + " exit " + std::to_string(r.code) + ": " + r.err);
                    continue;
                }
                std::vector<std::string> files{out};
                if (t.name == "eval") files.push_back(out + ".dump");
                check_replay(t.name + " --threads " + threads, files, out + ".manifest.json");
                std::string joined;
                for (const auto& b : snapshot(files)) joined += b + '\x1f';
                outputs.push_back(joined);
                ++checked;
            }
            if (outputs.size() == 2 && outputs[0] != outputs[1]) problems.push_back(t.name + " differs across threads");
        }
    } catch (const std::exception& e) {
        problems.push_back(e.what());
    }
    std::string detail = std::to_string(checked) + " runs replayed from manifests";
    for (const auto& p : problems) detail += "; " + p;
    return {problems.empty(), detail};
}

}  // namespace

// With no argument every criterion runs; `groundrec_acceptance N` runs only criterion N.
int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"grounding oracle recovery", oracle_recovery},
        {"popularity factor conformance", popularity_conformance},
        {"injection identity and bound", identity_and_bound},
        {"gamma monotonicity", gamma_monotonicity},
        {"brute-force ranking equivalence", brute_force_equivalence},
        {"metric oracles", metric_oracles},
        {"null-model calibration", null_model},
        {"temporal leakage freedom", temporal_leakage},
        {"gamma grid exactness", grid_exactness},
        {"popularity injection effect", popularity_effect},
        {"bm25 noise sensitivity", bm25_noise},
        {"cli determinism", cli_determinism},
    };
    std::size_t only = 0;
    if (argc > 1) {
        only = std::strtoul(argv[1], nullptr, 10);
        if (only < 1 || only > criteria.size()) {
            std::cerr << "criterion must be 1.." << criteria.size() << "\n";
            return 2;
        }
    }
    int failed = 0, ran = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && i + 1 != only) continue;
        ++ran;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
