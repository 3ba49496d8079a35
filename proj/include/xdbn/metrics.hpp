#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "xdbn/dataset.hpp"
#include "xdbn/error.hpp"
#include "xdbn/models.hpp"
#include "xdbn/numeric.hpp"
#include "xdbn/preprocess.hpp"
#include "xdbn/recipe.hpp"
#include "xdbn/rng.hpp"

// Evaluation metrics, stratified k-fold cross-validation, the two-method
// t-test at pooled 2k-2 degrees of freedom, and the tie-break rule that picks
// the better ranking method.

namespace xdbn {

enum class MetricKind { Auc, Smape, Mape };

inline const char* metric_kind_name(MetricKind m) {
    switch (m) {
        case MetricKind::Auc: return "auc";
        case MetricKind::Smape: return "smape";
        case MetricKind::Mape: return "mape";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// metrics

// Mann-Whitney AUC with ties counted half via average ranks.
inline double auc(const std::vector<double>& scores, const std::vector<double>& labels) {
    if (scores.size() != labels.size()) throw DataError("auc: length mismatch");
    std::size_t n = scores.size();
    std::size_t npos = 0;
    for (double y : labels) {
        if (y != 0.0 && y != 1.0) throw DataError("auc: labels must be 0/1");
        npos += (y == 1.0);
    }
    if (npos == 0 || npos == n) throw DataError("auc: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1.0) rank_sum_pos += avg_rank;
        i = j;
    }
    double u = rank_sum_pos - static_cast<double>(npos) * static_cast<double>(npos + 1) / 2.0;
    return u / (static_cast<double>(npos) * static_cast<double>(n - npos));
}

// Symmetric MAPE, (100/n) sum |F-A| / ((|A|+|F|)/2); a 0/0 term contributes 0.
inline double smape(const std::vector<double>& predicted, const std::vector<double>& actual) {
    if (predicted.size() != actual.size() || predicted.empty())
        throw DataError("smape: need equal nonempty vectors");
    double total = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        double denom = 0.5 * (std::fabs(actual[i]) + std::fabs(predicted[i]));
        if (denom == 0.0) continue;
        total += std::fabs(predicted[i] - actual[i]) / denom;
    }
    return 100.0 * total / static_cast<double>(predicted.size());
}

// Plain MAPE; rejects zero actuals, listing the offending indices. With
// as_fraction the result is divided by 100 (some published tables report the
// fractional form).
inline double mape(const std::vector<double>& predicted, const std::vector<double>& actual,
                   bool as_fraction = false) {
    if (predicted.size() != actual.size() || predicted.empty())
        throw DataError("mape: need equal nonempty vectors");
    std::string zeros;
    for (std::size_t i = 0; i < actual.size(); ++i)
        if (actual[i] == 0.0) zeros += (zeros.empty() ? "" : ", ") + std::to_string(i);
    if (!zeros.empty()) throw DataError("mape: zero actual value at indices " + zeros);
    double total = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        total += std::fabs(predicted[i] - actual[i]) / std::fabs(actual[i]);
    double pct = 100.0 * total / static_cast<double>(predicted.size());
    return as_fraction ? pct / 100.0 : pct;
}

// ---------------------------------------------------------------------------
// Student t distribution (regularized incomplete beta)

namespace detail {

inline double betacf(double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 3e-16, fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

inline double betai(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                         b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided tail probability of Student's t.
inline double student_t_two_sided_p(double t, std::size_t df) {
    if (!std::isfinite(t)) return 0.0;
    double d = static_cast<double>(df);
    return detail::betai(d / 2.0, 0.5, d / (d + t * t));
}

// ---------------------------------------------------------------------------
// fold scores and t-tests

struct FoldScores {
    std::string method;
    ModelKind model = ModelKind::Logistic;
    MetricKind metric = MetricKind::Auc;
    std::vector<double> values;

    double mean_value() const { return mean(values); }
};

struct TTestResult {
    double t_statistic = 0.0;
    double p_value = 1.0;
    std::size_t degrees_of_freedom = 0;
    bool significant_at_5pct = false;
};

// Pooled two-sample t at 2k-2 degrees of freedom (the published arithmetic).
inline TTestResult two_sample_t_test(const FoldScores& a, const FoldScores& b) {
    const std::size_t k = a.values.size();
    if (k < 2 || b.values.size() != k)
        throw DataError("two_sample_t_test: need equal fold counts >= 2");
    double ma = mean(a.values), mb = mean(b.values);
    double va = 0.0, vb = 0.0;
    for (double v : a.values) va += (v - ma) * (v - ma);
    for (double v : b.values) vb += (v - mb) * (v - mb);
    double pooled = (va + vb) / static_cast<double>(2 * k - 2);

    TTestResult out;
    out.degrees_of_freedom = 2 * k - 2;
    if (pooled <= 0.0) {
        if (ma == mb) {
            out.t_statistic = 0.0;
            out.p_value = 1.0;
        } else {
            out.t_statistic = ma < mb ? -std::numeric_limits<double>::infinity()
                                      : std::numeric_limits<double>::infinity();
            out.p_value = 0.0;
        }
    } else {
        double se = std::sqrt(pooled * 2.0 / static_cast<double>(k));
        out.t_statistic = (ma - mb) / se;
        out.p_value = student_t_two_sided_p(out.t_statistic, out.degrees_of_freedom);
    }
    out.significant_at_5pct = out.p_value < 0.05;
    return out;
}

// Paired variant (k-1 degrees of freedom), available behind this call.
inline TTestResult paired_t_test(const FoldScores& a, const FoldScores& b) {
    const std::size_t k = a.values.size();
    if (k < 2 || b.values.size() != k)
        throw DataError("paired_t_test: need equal fold counts >= 2");
    std::vector<double> d(k);
    for (std::size_t i = 0; i < k; ++i) d[i] = a.values[i] - b.values[i];
    double md = mean(d);
    double vd = 0.0;
    for (double v : d) vd += (v - md) * (v - md);
    vd /= static_cast<double>(k - 1);

    TTestResult out;
    out.degrees_of_freedom = k - 1;
    if (vd <= 0.0) {
        if (md == 0.0) {
            out.t_statistic = 0.0;
            out.p_value = 1.0;
        } else {
            out.t_statistic = md < 0.0 ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
            out.p_value = 0.0;
        }
    } else {
        out.t_statistic = md / std::sqrt(vd / static_cast<double>(k));
        out.p_value = student_t_two_sided_p(out.t_statistic, out.degrees_of_freedom);
    }
    out.significant_at_5pct = out.p_value < 0.05;
    return out;
}

// ---------------------------------------------------------------------------
// stratified k-fold cross-validation

// Fold assignment: shuffle within each stratum, deal round-robin. Statistical
// recipe steps (standardization, resampling) are fit inside each training
// fold only; the held-out fold is transformed with the fitted stats.
inline FoldScores kfold_cv(const Dataset& data, const std::vector<std::size_t>& feature_subset,
                           TaskKind task, const ModelConfig& model_cfg, std::size_t k,
                           RngStream& rng, MetricKind metric, const Recipe* stats_recipe = nullptr,
                           bool mape_as_fraction = false, const std::string& method_label = "") {
    if (k < 2) throw ConfigError("kfold_cv: k must be >= 2");
    if (!data.has_target) throw DataError("kfold_cv: dataset has no target");
    for (std::size_t c : feature_subset)
        if (c >= data.n_features()) throw DataError("kfold_cv: feature index out of range");

    std::vector<std::size_t> strata = detail::strata_of(data.target, task);
    std::size_t n_strata = 0;
    for (std::size_t s : strata) n_strata = std::max(n_strata, s + 1);
    std::vector<std::vector<std::size_t>> groups(n_strata);
    for (std::size_t i = 0; i < data.n_samples(); ++i) groups[strata[i]].push_back(i);
    std::vector<std::vector<std::size_t>> folds(k);
    for (auto& rows : groups) {
        rng.shuffle(rows);
        for (std::size_t i = 0; i < rows.size(); ++i) folds[i % k].push_back(rows[i]);
    }
    for (std::size_t f = 0; f < k; ++f)
        if (folds[f].empty()) throw DataError("kfold_cv: fold " + std::to_string(f) + " is empty");

    FoldScores out;
    out.method = method_label;
    out.model = model_cfg.kind;
    out.metric = metric;
    out.values.resize(k);

    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train_rows;
        for (std::size_t g = 0; g < k; ++g)
            if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        std::sort(train_rows.begin(), train_rows.end());
        std::vector<std::size_t> test_rows = folds[f];
        std::sort(test_rows.begin(), test_rows.end());

        Dataset train = take_rows(data, train_rows);
        Dataset test = take_rows(data, test_rows);
        if (stats_recipe) {
            RngStream fold_rng = rng.split("fold-stats").split(f);
            auto [fitted_train, fitted] = fit_statistical(train, *stats_recipe, fold_rng);
            train = std::move(fitted_train);
            test = transform_statistical(test, fitted);
        }

        auto select = [&](const Dataset& ds) {
            Matrix m(ds.n_samples(), feature_subset.size());
            for (std::size_t r = 0; r < ds.n_samples(); ++r)
                for (std::size_t j = 0; j < feature_subset.size(); ++j)
                    m(r, j) = ds.features(r, feature_subset[j]);
            return m;
        };
        Matrix xtr = select(train), xte = select(test);

        std::uint64_t fold_seed = rng.split("fold-model").split(f).seed();
        FittedModel model = fit_model(xtr, train.target, task, model_cfg, fold_seed);
        std::vector<double> pred = predict(model, xte);
        switch (metric) {
            case MetricKind::Auc: out.values[f] = auc(pred, test.target); break;
            case MetricKind::Smape: out.values[f] = smape(pred, test.target); break;
            case MetricKind::Mape: out.values[f] = mape(pred, test.target, mape_as_fraction); break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// method selection

struct MethodComparison {
    ModelKind model;
    double mean_a = 0.0;  // first ranking method
    double mean_b = 0.0;  // second ranking method
    TTestResult ttest;
};

struct SelectionDecision {
    std::string winner;  // name_a, name_b, or "tie"
    ModelKind deciding_model = ModelKind::Tree;
    bool significant = false;
    std::string rationale;
};

// Classification: compare decision-tree mean AUC (higher wins). Regression:
// compare the best (lowest) mean error over the linear/ridge/lasso trio.
inline SelectionDecision select_better_method(const std::vector<MethodComparison>& results,
                                              TaskKind task, const std::string& name_a = "EGA",
                                              const std::string& name_b = "Wald chi-square") {
    SelectionDecision out;
    if (task == TaskKind::Classification) {
        const MethodComparison* tree = nullptr;
        for (const auto& r : results)
            if (r.model == ModelKind::Tree) tree = &r;
        if (!tree)
            throw ConfigError("select_better_method: no decision-tree results to compare");
        out.deciding_model = ModelKind::Tree;
        out.significant = tree->ttest.significant_at_5pct;
        if (tree->mean_a == tree->mean_b) {
            out.winner = "tie";
            out.rationale = "decision-tree mean AUC identical for both methods";
        } else {
            bool a = tree->mean_a > tree->mean_b;
            out.winner = a ? name_a : name_b;
            out.rationale = "decision tree (most interpretable classifier) has higher mean AUC "
                            "under " + out.winner;
        }
        return out;
    }

    const MethodComparison* best = nullptr;
    bool best_is_a = true;
    double best_mean = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& r : results) {
        if (r.model != ModelKind::Linear && r.model != ModelKind::Ridge &&
            r.model != ModelKind::Lasso)
            continue;
        any = true;
        if (r.mean_a < best_mean) {
            best_mean = r.mean_a;
            best = &r;
            best_is_a = true;
        }
        if (r.mean_b < best_mean) {
            best_mean = r.mean_b;
            best = &r;
            best_is_a = false;
        }
    }
    if (!any)
        throw ConfigError(
            "select_better_method: no linear/ridge/lasso results to compare");
    out.deciding_model = best->model;
    out.significant = best->ttest.significant_at_5pct;
    if (best->mean_a == best->mean_b) {
        out.winner = "tie";
        out.rationale = "lowest mean error identical for both methods";
    } else {
        out.winner = best_is_a ? name_a : name_b;
        out.rationale = std::string("lowest mean error among the interpretable regressors (") +
                        model_kind_name(best->model) + ") under " + out.winner;
    }
    return out;
}

}  // namespace xdbn
