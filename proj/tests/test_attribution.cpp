#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/oracles.hpp"
#include "xdbn/attribution.hpp"
#include "xdbn/rng.hpp"

using namespace xdbn;

namespace {

// Random shape-chained weight list: n -> m1 -> ... -> n, entries in [-3, 3]
// with zero columns avoided.
std::vector<Matrix> random_chain(RngStream& rng, std::size_t max_dim = 8, std::size_t max_layers = 5) {
    std::size_t n = 2 + rng.below(max_dim - 1);
    std::size_t layers = 1 + rng.below(max_layers);
    std::vector<std::size_t> sizes{n};
    for (std::size_t l = 0; l + 1 < layers; ++l) sizes.push_back(2 + rng.below(max_dim - 1));
    sizes.push_back(n);
    std::vector<Matrix> out;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Matrix w(sizes[l], sizes[l + 1]);
        for (auto& v : w.data()) {
            v = rng.uniform(-3, 3);
            if (std::fabs(v) < 1e-3) v = 0.1;  // keep columns clearly alive
        }
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace

TEST_CASE("normalize_columns hand cases", "[attribution]") {
    NormalizedWeightMatrix n = normalize_columns(Matrix{{1, -3}, {-2, 1}});
    CHECK(n.matrix(0, 0) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(n.matrix(1, 0) == Catch::Approx(2.0 / 3.0).margin(1e-15));
    CHECK(n.matrix(0, 1) == Catch::Approx(0.75).margin(1e-15));
    CHECK(n.matrix(1, 1) == Catch::Approx(0.25).margin(1e-15));

    CHECK(normalize_columns(Matrix{{5}}).matrix(0, 0) == 1.0);

    // idempotence on an already column-stochastic nonnegative matrix
    Matrix s{{0.5, 0.25}, {0.5, 0.75}};
    CHECK(normalize_columns(s).matrix == s);
}

TEST_CASE("normalize_columns dead column handling", "[attribution]") {
    Matrix w{{1, 0}, {2, 0}};
    try {
        normalize_columns(w);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
    NormalizedWeightMatrix u = normalize_columns(w, DeadColumnPolicy::Uniform);
    CHECK(u.matrix(0, 1) == 0.5);
    CHECK(u.matrix(1, 1) == 0.5);
}

TEST_CASE("cumulative_weights hand case and closure", "[attribution]") {
    NormalizedWeightMatrix a{Matrix{{1.0 / 3.0, 0.75}, {2.0 / 3.0, 0.25}}};
    CHECK(cumulative_weights({a}) == a.matrix);

    NormalizedWeightMatrix b{Matrix{{0.5, 0.25}, {0.5, 0.75}}};
    Matrix cw = cumulative_weights({a, b});
    CHECK(cw(0, 0) == Catch::Approx(0.5416666666666666).margin(1e-12));
    CHECK(cw(0, 1) == Catch::Approx(0.6458333333333333).margin(1e-12));
    CHECK(cw(1, 0) == Catch::Approx(0.4583333333333333).margin(1e-12));
    CHECK(cw(1, 1) == Catch::Approx(0.3541666666666666).margin(1e-12));

    RngStream rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        auto chain = random_chain(rng);
        std::vector<NormalizedWeightMatrix> norm;
        for (const auto& w : chain) norm.push_back(normalize_columns(w));
        Matrix out = cumulative_weights(norm);
        for (std::size_t j = 0; j < out.cols(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < out.rows(); ++i) s += out(i, j);
            CHECK(std::fabs(s - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("cumulative_weights rejects broken chains", "[attribution]") {
    NormalizedWeightMatrix a{Matrix(2, 3, 0.5)};
    NormalizedWeightMatrix b{Matrix(4, 2, 0.25)};
    try {
        cumulative_weights({a, b});
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("0 and 1") != std::string::npos);
    }
}

TEST_CASE("relative_contribution hand cases", "[attribution]") {
    RelativeContribution rc = relative_contribution(Matrix{{0.5, 0.5}, {0.5, 0.5}});
    CHECK(rc.rc == std::vector<double>{1.0, 1.0});

    Matrix cw{{0.5416666666666666, 0.6458333333333333}, {0.4583333333333333, 0.3541666666666666}};
    RelativeContribution rc2 = relative_contribution(cw);
    CHECK(rc2.rc[0] == Catch::Approx(1.1875).margin(1e-12));
    CHECK(rc2.rc[1] == Catch::Approx(0.8125).margin(1e-12));

    CHECK_THROWS_AS(relative_contribution(Matrix(2, 3, 0.1)), NumericError);
}

TEST_CASE("relative_importance hand cases", "[attribution]") {
    ImportanceVector v = relative_importance(RelativeContribution{{1.0, 1.0}});
    CHECK(v.scores == std::vector<double>{50.0, 50.0});

    ImportanceVector v2 = relative_importance(RelativeContribution{{1.1875, 0.8125}});
    CHECK(v2.scores[0] == Catch::Approx(59.375).margin(1e-12));
    CHECK(v2.scores[1] == Catch::Approx(40.625).margin(1e-12));

    ImportanceVector v3 = relative_importance(RelativeContribution{{3.0, 1.0, 0.0}});
    CHECK(v3.scores == std::vector<double>{75.0, 25.0, 0.0});
    CHECK(v3.ranking == std::vector<std::size_t>{0, 1, 2});

    CHECK_THROWS_AS(relative_importance(RelativeContribution{{0.0, 0.0}}), NumericError);
}

TEST_CASE("ega full hand trace", "[attribution]") {
    std::vector<Matrix> ws = {Matrix{{1, 3}, {2, 1}}, Matrix{{2, 1}, {2, 3}}};
    ImportanceVector v = ega(ws);
    CHECK(v.scores[0] == Catch::Approx(59.375).margin(1e-12));
    CHECK(v.scores[1] == Catch::Approx(40.625).margin(1e-12));
    CHECK(v.ranking == std::vector<std::size_t>{0, 1});
}

TEST_CASE("ega diagonal weights give uniform importance", "[attribution]") {
    Matrix diag(4, 4);
    for (std::size_t i = 0; i < 4; ++i) diag(i, i) = 0.5 + 0.25 * static_cast<double>(i);
    ImportanceVector v = ega({diag});
    for (double s : v.scores) CHECK(s == Catch::Approx(25.0).margin(1e-12));
}

TEST_CASE("ega composition equals the explicit pipeline exactly", "[attribution]") {
    RngStream rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto chain = random_chain(rng, 6, 1);
        ImportanceVector a = ega(chain);
        ImportanceVector b =
            relative_importance(relative_contribution(normalize_columns(chain[0]).matrix));
        CHECK(a.scores == b.scores);
    }
}

TEST_CASE("garson hand trace and degenerate cases", "[attribution]") {
    ImportanceVector v = garson(Matrix{{1, 2}, {3, 4}}, Matrix{{0.5}, {1.0}});
    CHECK(v.scores[0] == Catch::Approx(100.0 * (0.125 + 1.0 / 3.0) / 1.5).margin(1e-12));
    CHECK(v.scores[0] == Catch::Approx(30.5556).margin(1e-4));
    CHECK(v.scores[1] == Catch::Approx(69.4444).margin(1e-4));
    auto naive = oracle::garson_naive(Matrix{{1, 2}, {3, 4}}, Matrix{{0.5}, {1.0}});
    CHECK(v.scores[0] == Catch::Approx(naive[0]).margin(1e-12));
    CHECK(v.scores[1] == Catch::Approx(naive[1]).margin(1e-12));

    // single hidden unit: output weight cancels
    ImportanceVector a = garson(Matrix{{1}, {3}}, Matrix{{0.7}});
    ImportanceVector b = garson(Matrix{{1}, {3}}, Matrix{{123.0}});
    CHECK(a.scores == b.scores);
    CHECK(a.scores[0] == Catch::Approx(25.0).margin(1e-12));

    // all-equal weights are symmetric
    ImportanceVector u = garson(Matrix(3, 2, 0.4), Matrix(2, 1, 0.9));
    for (double s : u.scores) CHECK(s == Catch::Approx(100.0 / 3.0).margin(1e-12));

    CHECK_THROWS_AS(garson(Matrix{{0, 1}, {0, 1}}, Matrix{{1.0}, {1.0}}), NumericError);
}

TEST_CASE("garson supports multiple output units by summation", "[attribution]") {
    Matrix w_ih{{1, 2}, {3, 4}};
    Matrix two_outputs{{0.25, 0.25}, {0.5, 0.5}};
    Matrix one_output{{0.5}, {1.0}};
    ImportanceVector a = garson(w_ih, two_outputs);
    ImportanceVector b = garson(w_ih, one_output);
    CHECK(a.scores[0] == Catch::Approx(b.scores[0]).margin(1e-12));
}

TEST_CASE("top_k selection", "[attribution]") {
    ImportanceVector v;
    v.scores = {75.0, 25.0, 0.0};
    v.ranking = {0, 1, 2};
    TopK t = top_k(v, 2);
    CHECK(t.indices == std::vector<std::size_t>{0, 1});
    CHECK(t.cumulative_percent == 100.0);

    TopK all = top_k(v, 3);
    CHECK(std::fabs(all.cumulative_percent - 100.0) < 1e-6);

    ImportanceVector h;
    h.scores = {59.375, 40.625};
    h.ranking = {0, 1};
    TopK one = top_k(h, 1);
    CHECK(one.indices == std::vector<std::size_t>{0});
    CHECK(one.cumulative_percent == 59.375);

    CHECK_THROWS_AS(top_k(v, 0), NumericError);
    CHECK_THROWS_AS(top_k(v, 4), NumericError);
}

// The invariance suite on random shape-chained lists. The acceptance binary
// runs the same checks at 200 lists; this keeps a smaller copy in the unit
// suite so breakage is caught close to the code.
TEST_CASE("attribution property suite", "[attribution][properties]") {
    RngStream rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        auto chain = random_chain(rng);
        ImportanceVector base = ega(chain);
        const std::size_t n = base.scores.size();

        // sums to 100, nonnegative
        double total = 0.0;
        for (double s : base.scores) {
            CHECK(s >= 0.0);
            total += s;
        }
        CHECK(std::fabs(total - 100.0) < 1e-6);

        // naive oracle equivalence
        auto naive = oracle::ega_naive(chain);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::fabs(base.scores[i] - naive[i]) < 1e-12 * std::max(1.0, std::fabs(naive[i])));

        // sign invariance: flipping signs of any subset changes nothing at all
        auto flipped = chain;
        for (auto& w : flipped)
            for (auto& v : w.data())
                if (rng.bernoulli(0.5)) v = -v;
        CHECK(ega(flipped).scores == base.scores);

        // per-column positive scaling of one layer
        auto scaled = chain;
        std::size_t layer = rng.below(scaled.size());
        std::size_t col = rng.below(scaled[layer].cols());
        double c = std::exp(rng.uniform(-2.0, 2.0));
        for (std::size_t r = 0; r < scaled[layer].rows(); ++r) scaled[layer](r, col) *= c;
        ImportanceVector after = ega(scaled);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::fabs(after.scores[i] - base.scores[i]) <= 1e-12 * std::max(1.0, base.scores[i]));

        // permutation equivariance: new feature i is old feature perm[i]
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        auto permuted = chain;
        if (chain.size() == 1) {
            // single layer: rows and columns belong to the same feature axis
            Matrix both(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) both(i, j) = chain[0](perm[i], perm[j]);
            permuted[0] = both;
        } else {
            Matrix new_first(n, chain.front().cols());
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < new_first.cols(); ++j)
                    new_first(i, j) = chain.front()(perm[i], j);
            permuted.front() = new_first;
            Matrix new_last(chain.back().rows(), n);
            for (std::size_t i = 0; i < new_last.rows(); ++i)
                for (std::size_t j = 0; j < n; ++j) new_last(i, j) = chain.back()(i, perm[j]);
            permuted.back() = new_last;
        }
        ImportanceVector permuted_scores = ega(permuted);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(permuted_scores.scores[i] == base.scores[perm[i]]);
    }
}
