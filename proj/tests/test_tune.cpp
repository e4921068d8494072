#include <doctest.h>

#include <random>

#include "groundrec/tune.hpp"
#include "test_support.hpp"

using namespace groundrec;
using groundrec::testing::make_catalog;
using groundrec::testing::make_sample;

namespace {

/// Gaussian vector keyed by the text, standing in for an arbitrary encoder.
class GaussianProvider final : public EmbeddingProvider {
public:
    explicit GaussianProvider(Eigen::Index dim) : dim_(dim) {}
    Eigen::Index dim() const override { return dim_; }
    EmbeddingVectorf embed(const Tokens& tokens) const override {
        std::mt19937_64 rng(hash_token(join_tokens(tokens), 77));
        std::normal_distribution<float> g;
        EmbeddingVectorf v(dim_);
        for (Eigen::Index k = 0; k < dim_; ++k) v[k] = g(rng);
        return v;
    }
    std::string name() const override { return "gaussian"; }

private:
    Eigen::Index dim_;
};

/// Output depends only on the user id, so it carries no information about the target.
class UserNoiseGenerator final : public Generator {
public:
    GeneratedText generate(const SequenceSample& s) const override { return {{"noise", s.user_id}, "noise"}; }
    std::string name() const override { return "noise"; }
};

struct World {
    ItemCatalog catalog;
    GaussianProvider provider{16};
    EmbeddingMatrixf items;
    PopularityTable pop;
    UserNoiseGenerator gen;
    std::vector<SequenceSample> samples;

    Pipeline pipeline(Injection inj) const {
        Pipeline p{&catalog, &gen, Strategy::l2, &items, &provider, {inj, 0.0, false}, &pop};
        return p;
    }
};

/// Every target is item 0, the unique most popular item. The rest sit just
/// below it in popularity, so the boost keeps reordering up to large gamma.
World popular_target_world(std::size_t n_items, std::size_t n_samples) {
    World w;
    std::vector<std::string> titles;
    for (std::size_t i = 0; i < n_items; ++i) titles.push_back("t" + std::to_string(i));
    w.catalog = make_catalog(titles);
    w.items.resize(static_cast<Eigen::Index>(n_items), 16);
    for (ItemIndex i = 0; i < n_items; ++i) w.items.row(i) = w.provider.embed({"item", std::to_string(i)}).transpose();
    std::mt19937_64 rng(2024);
    std::vector<std::uint64_t> counts(n_items);
    counts[0] = 10000;
    for (std::size_t i = 1; i + 1 < n_items; ++i) counts[i] = 9000 + rng() % 1000;
    counts[n_items - 1] = 0;
    w.pop = popularity_from_counts(counts);
    for (std::size_t s = 0; s < n_samples; ++s) {
        w.samples.push_back(make_sample("u" + std::to_string(s), {w.catalog.item_id(1)}, w.catalog.item_id(0)));
    }
    return w;
}

}  // namespace

TEST_CASE("gamma grid") {
    const auto g = gamma_grid();
    REQUIRE(g.size() == 200);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.01);
    CHECK(g[2] == 0.02);
    CHECK(g[100] == 1.0);
    CHECK(g[101] == 2.0);
    CHECK(g.back() == 100.0);
    CHECK(std::is_sorted(g.begin(), g.end(), std::less_equal<>()));
}

TEST_CASE("inert injection ties every gamma and picks zero") {
    auto w = popular_target_world(30, 20);
    w.pop = popularity_from_counts(std::vector<std::uint64_t>(30, 5));
    const auto res = tune_gamma(w.samples, w.pipeline(Injection::popularity));
    CHECK(res.best_gamma == 0.0);
    CHECK(res.sweep.size() == 200);
    for (const auto& row : res.sweep) CHECK(row.report.hr == res.sweep[0].report.hr);
}

TEST_CASE("most popular targets with a random oracle favour the largest gamma") {
    const auto w = popular_target_world(200, 300);
    const auto res = tune_gamma(w.samples, w.pipeline(Injection::popularity), {"ndcg@20"});
    CHECK(res.best_gamma == 100.0);
    for (std::size_t g = 1; g < res.sweep.size(); ++g) {
        CHECK(res.sweep[g].report.metric("ndcg@20") >= res.sweep[g - 1].report.metric("ndcg@20"));
    }
    CHECK(res.sweep.back().report.metric("ndcg@20") > res.sweep[198].report.metric("ndcg@20"));
}

TEST_CASE("sweep reuse matches a fresh evaluation") {
    const auto w = popular_target_world(120, 60);
    const auto grid = gamma_grid();
    const auto res = tune_gamma(w.samples, w.pipeline(Injection::popularity));
    for (std::size_t g : {37u, 104u, 162u}) {
        auto p = w.pipeline(Injection::popularity);
        p.grounding.gamma = grid[g];
        const auto fresh = evaluate(w.samples, p).report;
        CHECK(res.sweep[g].gamma == grid[g]);
        CHECK(res.sweep[g].report.hr == fresh.hr);
        CHECK(res.sweep[g].report.ndcg == fresh.ndcg);
    }
}

TEST_CASE("tune determinism across runs and threads") {
    const auto w = popular_target_world(80, 40);
    const auto a = tune_gamma(w.samples, w.pipeline(Injection::popularity), {"hr@10"});
    TuneOptions opt{"hr@10"};
    opt.threads = 6;
    const auto b = tune_gamma(w.samples, w.pipeline(Injection::popularity), opt);
    CHECK(a.best_gamma == b.best_gamma);
    CHECK(format_sweep(a) == format_sweep(b));
}

TEST_CASE("tune errors") {
    const auto w = popular_target_world(10, 3);
    CHECK_THROWS_AS(tune_gamma({}, w.pipeline(Injection::popularity)), DataError);
    CHECK_THROWS_AS(tune_gamma(w.samples, w.pipeline(Injection::popularity), {"hr@4"}), UsageError);
    auto p = w.pipeline(Injection::popularity);
    p.strategy = Strategy::bm25;
    CHECK_THROWS_AS(tune_gamma(w.samples, p), UsageError);
}

TEST_CASE("sweep table layout") {
    const auto w = popular_target_world(10, 3);
    const auto res = tune_gamma(w.samples, w.pipeline(Injection::popularity));
    const auto text = format_sweep(res);
    CHECK(text.rfind("# metric=ndcg@20\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3 + 200);
}
