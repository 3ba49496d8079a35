// Acceptance suite: every release criterion with its pinned tolerance, one
// pass/fail line each. Exits nonzero if any criterion fails.
//
// Criteria 7 and 8 validate the dataset recipes and the full pipeline. The
// public source datasets are not bundled; by default both run on generated
// files that reproduce the real schemas and category sets (and, for the
// pipeline check, a planted signal). Point XDBN_DATA_DIR at a directory with
// loan_default.csv / churn.csv / forest_fires.csv / auto_mpg.csv to run the
// recipe checks against the real files instead.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/data_gen.hpp"
#include "support/oracles.hpp"
#include "xdbn/csv.hpp"
#include "xdbn/pipeline.hpp"

using namespace xdbn;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && passed) {
            passed = false;
            detail = what;
        }
    }
};

int g_failures = 0;

void report(int id, const char* name, const Outcome& o) {
    std::printf("[%s] criterion %d: %s%s%s\n", o.passed ? "PASS" : "FAIL", id, name,
                o.detail.empty() ? "" : " -- ", o.detail.c_str());
    std::fflush(stdout);
    if (!o.passed) ++g_failures;
}

std::string recipe_path(const char* name) {
    return std::string(XDBN_SOURCE_DIR) + "/recipes/" + name;
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// ---------------------------------------------------------------------------

Outcome criterion1_ega_hand_trace() {
    Outcome o;
    std::vector<Matrix> ws = {Matrix{{1, 3}, {2, 1}}, Matrix{{2, 1}, {2, 3}}};

    NormalizedWeightMatrix n1 = normalize_columns(ws[0]);
    NormalizedWeightMatrix n2 = normalize_columns(ws[1]);
    o.require(near(n1.matrix(0, 0), 1.0 / 3.0, 1e-12) && near(n1.matrix(1, 0), 2.0 / 3.0, 1e-12) &&
                  near(n1.matrix(0, 1), 0.75, 1e-12) && near(n1.matrix(1, 1), 0.25, 1e-12),
              "normalized W1 deviates from hand trace");
    o.require(near(n2.matrix(0, 0), 0.5, 1e-12) && near(n2.matrix(0, 1), 0.25, 1e-12) &&
                  near(n2.matrix(1, 0), 0.5, 1e-12) && near(n2.matrix(1, 1), 0.75, 1e-12),
              "normalized W2 deviates from hand trace");

    Matrix cw = cumulative_weights({n1, n2});
    o.require(near(cw(0, 0), 13.0 / 24.0, 1e-12) && near(cw(0, 1), 31.0 / 48.0, 1e-12) &&
                  near(cw(1, 0), 11.0 / 24.0, 1e-12) && near(cw(1, 1), 17.0 / 48.0, 1e-12),
              "cumulative weight matrix deviates from hand trace");

    RelativeContribution rc = relative_contribution(cw);
    o.require(near(rc.rc[0], 1.1875, 1e-12) && near(rc.rc[1], 0.8125, 1e-12),
              "relative contribution deviates from hand trace");

    auto t0 = std::chrono::steady_clock::now();
    ImportanceVector v = ega(ws);
    auto t1 = std::chrono::steady_clock::now();
    o.require(near(v.scores[0], 59.375, 1e-12) && near(v.scores[1], 40.625, 1e-12),
              "importance deviates from hand trace");
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    o.require(ms < 1.0, "runtime " + std::to_string(ms) + " ms >= 1 ms");

    auto naive = oracle::ega_naive(ws);
    o.require(near(v.scores[0], naive[0], 1e-12) && near(v.scores[1], naive[1], 1e-12),
              "differs from scalar-loop oracle");
    return o;
}

Outcome criterion2_garson_hand_trace() {
    Outcome o;
    ImportanceVector v = garson(Matrix{{1, 2}, {3, 4}}, Matrix{{0.5}, {1.0}});
    o.require(near(v.scores[0], 30.5556, 1e-4), "score[0] off the hand trace");
    o.require(near(v.scores[1], 69.4444, 1e-4), "score[1] off the hand trace");
    auto naive = oracle::garson_naive(Matrix{{1, 2}, {3, 4}}, Matrix{{0.5}, {1.0}});
    o.require(near(v.scores[0], naive[0], 1e-12), "differs from step-by-step oracle");
    return o;
}

Outcome criterion3_attribution_properties() {
    Outcome o;
    RngStream rng(40961);
    for (int trial = 0; trial < 200 && o.passed; ++trial) {
        // random shape-chained list, n,m <= 8, L <= 5
        std::size_t n = 2 + rng.below(7);
        std::size_t layers = 1 + rng.below(5);
        std::vector<std::size_t> sizes{n};
        for (std::size_t l = 0; l + 1 < layers; ++l) sizes.push_back(2 + rng.below(7));
        sizes.push_back(n);
        std::vector<Matrix> chain;
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            Matrix w(sizes[l], sizes[l + 1]);
            for (auto& v : w.data()) {
                v = rng.uniform(-3, 3);
                if (std::fabs(v) < 1e-3) v = 0.1;
            }
            chain.push_back(std::move(w));
        }

        ImportanceVector base = ega(chain);
        double total = 0.0;
        for (double s : base.scores) {
            o.require(s >= 0.0, "negative importance score");
            total += s;
        }
        o.require(near(total, 100.0, 1e-6), "scores do not sum to 100 within 1e-6");

        auto naive = oracle::ega_naive(chain);
        for (std::size_t i = 0; i < n; ++i)
            o.require(std::fabs(base.scores[i] - naive[i]) <=
                          1e-12 * std::max(1.0, std::fabs(naive[i])),
                      "scalar-loop oracle disagrees beyond 1e-12");

        auto flipped = chain;
        for (auto& w : flipped)
            for (auto& v : w.data())
                if (rng.bernoulli(0.5)) v = -v;
        o.require(ega(flipped).scores == base.scores, "sign flip changed scores");

        auto scaled = chain;
        std::size_t layer = rng.below(scaled.size());
        std::size_t col = rng.below(scaled[layer].cols());
        double c = std::exp(rng.uniform(-2.0, 2.0));
        for (std::size_t r = 0; r < scaled[layer].rows(); ++r) scaled[layer](r, col) *= c;
        ImportanceVector after = ega(scaled);
        for (std::size_t i = 0; i < n; ++i)
            o.require(std::fabs(after.scores[i] - base.scores[i]) <= 1e-12 *
                          std::max(1.0, base.scores[i]),
                      "column scaling moved scores beyond 1e-12");

        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        auto permuted = chain;
        if (chain.size() == 1) {
            Matrix both(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) both(i, j) = chain[0](perm[i], perm[j]);
            permuted[0] = both;
        } else {
            Matrix first(n, chain.front().cols());
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < first.cols(); ++j)
                    first(i, j) = chain.front()(perm[i], j);
            permuted.front() = first;
            Matrix last(chain.back().rows(), n);
            for (std::size_t i = 0; i < last.rows(); ++i)
                for (std::size_t j = 0; j < n; ++j) last(i, j) = chain.back()(i, perm[j]);
            permuted.back() = last;
        }
        ImportanceVector p = ega(permuted);
        for (std::size_t i = 0; i < n; ++i)
            o.require(p.scores[i] == base.scores[perm[i]],
                      "permutation equivariance not exact");
    }
    if (o.passed) o.detail = "200 random weight chains";
    return o;
}

Outcome criterion4_cd_gradient_fidelity() {
    Outcome o;
    RngStream gen(17);
    Matrix w(2, 2);
    for (auto& v : w.data()) v = gen.uniform(-1.0, 1.0);
    std::vector<double> vb = {gen.uniform(-0.3, 0.3), gen.uniform(-0.3, 0.3)};
    std::vector<double> hb = {gen.uniform(-0.3, 0.3), gen.uniform(-0.3, 0.3)};
    RbmParams params;
    params.weights = w;
    params.visible_bias = vb;
    params.hidden_bias = hb;

    Matrix batch{{1, 0}, {0, 1}, {1, 1}, {0, 0}, {1, 0}, {1, 1}};
    oracle::RbmExactGradient exact = oracle::rbm_exact_gradient(batch, w, vb, hb);

    const int trials = 1000;
    const std::size_t k = 50;
    Matrix avg(2, 2);
    RngStream rng(23);
    for (int t = 0; t < trials; ++t) {
        CdGradient g = cd_k_gradient(batch, params, k, rng);
        for (std::size_t i = 0; i < avg.size(); ++i)
            avg.data()[i] += (g.pos_weight.data()[i] - g.neg_weight.data()[i]) / trials;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < avg.size(); ++i) {
        double d = avg.data()[i] - exact.weights.data()[i];
        num += d * d;
        den += exact.weights.data()[i] * exact.weights.data()[i];
    }
    double rel = std::sqrt(num / den);
    char buf[96];
    std::snprintf(buf, sizeof buf, "relative error %.4f over %d steps at k=%zu", rel, trials, k);
    o.detail = buf;
    o.require(rel < 0.10, o.detail);
    return o;
}

Outcome criterion5_synthetic_recovery() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    int ega_ok = 0, wald_ok = 0;
    const int seeds = 20;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        SyntheticSpec spec;
        spec.n_samples = 500;
        spec.n_informative = 3;
        spec.n_noise = 3;
        spec.task = TaskKind::Classification;
        spec.seed = seed;
        SyntheticData sd = generate_synthetic(spec);

        auto [stdz, stats] = standardize(sd.dataset.features, {0, 1, 2, 3, 4, 5});
        auto [x01, mm] = minmax_rescale(stdz);
        DbnaTrainConfig cfg;
        cfg.hidden_sizes = {3};
        cfg.rbm.learning_rate = 0.2;
        cfg.rbm.epochs = 100;
        cfg.rbm.batch_size = 32;
        RngStream rng(seed * 7919 + 13);
        DbnaTrainResult r = train_dbna(x01, cfg, rng);
        ImportanceVector imp = ega(collect_weights(r.model));
        std::set<std::size_t> top(imp.ranking.begin(), imp.ranking.begin() + 3);
        int hits = 0;
        for (std::size_t f : {0, 1, 2}) hits += static_cast<int>(top.count(f));
        if (hits >= 2) ++ega_ok;

        WaldRanking wald = wald_rank_classification(stdz, sd.dataset.target);
        std::set<std::size_t> wtop(wald.ranking.begin(), wald.ranking.begin() + 3);
        int whits = 0;
        for (std::size_t f : {0, 1, 2}) whits += static_cast<int>(wtop.count(f));
        if (whits >= 2) ++wald_ok;
    }
    auto t1 = std::chrono::steady_clock::now();
    double secs = std::chrono::duration<double>(t1 - t0).count();
    char buf[128];
    std::snprintf(buf, sizeof buf, "ega %d/20, wald %d/20, %.1fs", ega_ok, wald_ok, secs);
    o.detail = buf;
    o.require(ega_ok >= 18, o.detail);
    o.require(wald_ok >= 18, o.detail);
    o.require(secs < 120.0, "runtime exceeded 2 minutes");
    return o;
}

Outcome criterion6_statistical_machinery() {
    Outcome o;
    FoldScores a{"a", ModelKind::Tree, MetricKind::Auc, {1, 2, 3}};
    FoldScores b{"b", ModelKind::Tree, MetricKind::Auc, {3, 4, 5}};
    TTestResult t = two_sample_t_test(a, b);
    o.require(near(t.t_statistic, -2.449, 1e-3), "t statistic outside -2.449 +/- 0.001");
    o.require(t.degrees_of_freedom == 4, "df != 4 for k=3");

    FoldScores k10a{"a", ModelKind::Tree, MetricKind::Auc, std::vector<double>(10)};
    FoldScores k10b = k10a;
    for (std::size_t i = 0; i < 10; ++i) {
        k10a.values[i] = 0.5 + 0.013 * static_cast<double>(i);
        k10b.values[i] = 0.58 + 0.011 * static_cast<double>(i);
    }
    o.require(two_sample_t_test(k10a, k10b).degrees_of_freedom == 18, "df != 18 for k=10");

    for (int df : {4, 18})
        for (double tv = -6.0; tv <= 6.01; tv += 0.25) {
            double lib = student_t_two_sided_p(tv, static_cast<std::size_t>(df));
            double ref = oracle::t_two_sided_p_quadrature(tv, df);
            o.require(near(lib, ref, 1e-6), "p-value deviates from quadrature oracle by > 1e-6");
        }

    o.require(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75, "AUC example != 0.75 exactly");
    return o;
}

Outcome criterion7_recipe_fidelity() {
    Outcome o;
    const char* data_dir = std::getenv("XDBN_DATA_DIR");
    struct Case {
        const char* recipe;
        const char* real_file;
        std::string fallback;
        std::size_t expect;
    };
    std::vector<Case> cases;
    cases.push_back({"loan_default.json", "loan_default.csv", datagen::loan_csv(400, 7), 91});
    cases.push_back({"churn.json", "churn.csv", datagen::churn_csv(400, 11), 52});
    cases.push_back(
        {"forest_fires.json", "forest_fires.csv", datagen::forestfires_csv(300, 13), 21});
    cases.push_back({"auto_mpg.json", "auto_mpg.csv", datagen::autompg_csv(200, 17), 9});

    std::string used;
    for (const auto& c : cases) {
        Recipe recipe = load_recipe_file(recipe_path(c.recipe));
        Dataset raw;
        bool real = false;
        if (data_dir) {
            std::string path = std::string(data_dir) + "/" + c.real_file;
            std::ifstream probe(path);
            if (probe) {
                raw = load_csv_file(path);
                real = true;
            }
        }
        if (!real) {
            std::istringstream in(c.fallback);
            raw = load_csv(in);
        }
        RngStream rng(1);
        Dataset out = apply_recipe(raw, recipe, rng);
        if (out.n_features() != c.expect) {
            o.require(false, std::string(c.recipe) + " produced " +
                                 std::to_string(out.n_features()) + " columns, expected " +
                                 std::to_string(c.expect));
        }
        used += std::string(used.empty() ? "" : ", ") + c.recipe + (real ? " (real)" : " (schema)");
    }
    if (o.passed) o.detail = "91/52/21/9 columns; sources: " + used;
    return o;
}

Outcome criterion8_loan_pipeline() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    Recipe recipe = load_recipe_file(recipe_path("loan_default.json"));

    auto run_seed = [&recipe](int seed) {
        std::istringstream in(datagen::loan_csv(1000, 9000 + seed, 1.0, -1.2));
        Dataset raw = load_csv(in);
        ExperimentConfig cfg;
        cfg.hidden_sizes = {75, 60, 75};
        cfg.rbm.learning_rate = 0.2;
        cfg.rbm.epochs = 100;
        cfg.rbm.batch_size = 32;
        cfg.top_k = {26};
        cfg.models = {ModelKind::Tree};
        cfg.cv_folds = 10;
        cfg.seed = 42 + static_cast<std::uint64_t>(seed);
        ComparisonReport r = run_experiment_on(raw, recipe, cfg);
        return r;
    };

    // two worker threads over the ten seeds; results keyed by seed index
    std::vector<std::future<ComparisonReport>> futures;
    std::vector<ComparisonReport> reports(10);
    for (int pair = 0; pair < 5; ++pair) {
        auto f0 = std::async(std::launch::async, run_seed, 2 * pair);
        auto f1 = std::async(std::launch::async, run_seed, 2 * pair + 1);
        reports[2 * pair] = f0.get();
        reports[2 * pair + 1] = f1.get();
    }
    int improved = 0;
    for (int seed = 0; seed < 10; ++seed) {
        const CellResult& cell = reports[seed].cells.at(0);
        if (cell.holdout_ega > cell.holdout_without) ++improved;
        o.require(reports[seed].feature_names.size() == 91, "pipeline feature width != 91");
    }

    // deterministic per seed: an independent rerun reproduces the report bytes
    ComparisonReport again = run_seed(0);
    bool identical = report_to_json(again).dump() == report_to_json(reports[0]).dump();
    auto t1 = std::chrono::steady_clock::now();
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "EGA top-26 tree beat no-selection in %d/10 seeds; deterministic rerun %s; %.0fs "
                  "(schema-conforming generated data)",
                  improved, identical ? "identical" : "DIFFERS",
                  std::chrono::duration<double>(t1 - t0).count());
    o.detail = buf;
    o.require(improved >= 7, o.detail);
    o.require(identical, "rerun with the same seed produced different report bytes");
    return o;
}

Outcome criterion9_leakage_guard() {
    Outcome o;
    std::istringstream in(datagen::loan_csv(300, 55));
    Dataset raw = load_csv(in);
    Recipe recipe = load_recipe_file(recipe_path("loan_default.json"));
    ExperimentConfig cfg;
    cfg.hidden_sizes = {8};
    cfg.rbm.epochs = 3;
    cfg.top_k = {10};
    cfg.models = {ModelKind::Tree};
    cfg.cv_folds = 4;
    cfg.seed = 5;

    ExperimentArtifacts clean = run_training_stages(raw, recipe, cfg);

    Dataset poisoned = raw;
    for (std::size_t row : clean.split.holdout)
        for (std::size_t c = 0; c < raw.n_features(); ++c) {
            const std::string& name = raw.schema[c].name;
            bool skip = name == "SEX" || name == "EDUCATION" || name == "MARRIAGE" ||
                        name == "default.payment.next.month" ||
                        (name.rfind("PAY_", 0) == 0 && name.rfind("PAY_AMT", 0) != 0);
            if (!skip) poisoned.features(row, c) = -2.0 * raw.features(row, c) + 100.0;
        }
    ExperimentArtifacts dirty = run_training_stages(poisoned, recipe, cfg);

    o.require(clean.split.train == dirty.split.train, "train split changed");
    bool stats_same = clean.fitted.standardize_stats.size() == dirty.fitted.standardize_stats.size();
    for (std::size_t i = 0; stats_same && i < clean.fitted.standardize_stats.size(); ++i)
        stats_same = clean.fitted.standardize_stats[i].second.mean ==
                         dirty.fitted.standardize_stats[i].second.mean &&
                     clean.fitted.standardize_stats[i].second.stddev ==
                         dirty.fitted.standardize_stats[i].second.stddev;
    o.require(stats_same, "standardization stats changed");

    bool dbna_same = clean.dbna.depth() == dirty.dbna.depth();
    for (std::size_t l = 0; dbna_same && l < clean.dbna.depth(); ++l)
        dbna_same = clean.dbna.layers[l].weights == dirty.dbna.layers[l].weights &&
                    clean.dbna.layers[l].visible_bias == dirty.dbna.layers[l].visible_bias &&
                    clean.dbna.layers[l].hidden_bias == dirty.dbna.layers[l].hidden_bias;
    o.require(dbna_same, "autoencoder weights changed");
    o.require(clean.ega_scores.scores == dirty.ega_scores.scores &&
                  clean.ega_scores.ranking == dirty.ega_scores.ranking,
              "attribution ranking changed");
    o.require(clean.wald_scores.statistics == dirty.wald_scores.statistics &&
                  clean.wald_scores.ranking == dirty.wald_scores.ranking,
              "Wald ranking changed");
    o.require(clean.holdout.features != dirty.holdout.features,
              "poison had no effect; test is vacuous");
    if (o.passed) o.detail = "all training-fitted artifacts byte-identical";
    return o;
}

}  // namespace

int main() {
    report(1, "multi-layer attribution hand trace (1e-12, < 1 ms)", criterion1_ega_hand_trace());
    report(2, "single-layer attribution hand trace (1e-4)", criterion2_garson_hand_trace());
    report(3, "attribution invariance suite on 200 random chains",
           criterion3_attribution_properties());
    report(4, "CD update matches exact enumeration gradient within 10%",
           criterion4_cd_gradient_fidelity());
    report(5, "planted-feature recovery >= 90% of 20 seeds, < 2 min",
           criterion5_synthetic_recovery());
    report(6, "t-test, degrees of freedom, p-value oracle, AUC example",
           criterion6_statistical_machinery());
    report(7, "recipe feature counts 91/52/21/9", criterion7_recipe_fidelity());
    report(8, "loan-schema pipeline: selection improves the tree in >= 7/10 seeds",
           criterion8_loan_pipeline());
    report(9, "holdout poisoning leaves training artifacts unchanged",
           criterion9_leakage_guard());

    if (g_failures == 0) {
        std::printf("acceptance: all 9 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
