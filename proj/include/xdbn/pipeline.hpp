#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xdbn/attribution.hpp"
#include "xdbn/baselines.hpp"
#include "xdbn/csv.hpp"
#include "xdbn/dbna.hpp"
#include "xdbn/error.hpp"
#include "xdbn/metrics.hpp"
#include "xdbn/models.hpp"
#include "xdbn/preprocess.hpp"
#include "xdbn/recipe.hpp"
#include "xdbn/serialize.hpp"
#include "xdbn/synthetic.hpp"

// Config-driven experiment runner. One run executes: recipe, stratified
// 80/20 split, training-side standardization and resampling, deep-autoencoder
// training on the training portion, attribution and Wald rankings frozen from
// that portion, holdout scoring per (model, top-k) cell, k-fold CV over the
// full data restricted to the frozen selections for the two-method t-test,
// and the tie-break selection. Everything is a pure function of
// (dataset bytes, config), and nothing is written until the run finished.

namespace xdbn {

struct ExperimentConfig {
    std::string dataset_path;
    std::string recipe_path;
    std::vector<std::size_t> hidden_sizes;
    RbmTrainConfig rbm;
    std::vector<std::size_t> top_k;
    std::size_t t_test_k = 0;  // 0 = first top_k entry
    std::vector<ModelKind> models;
    std::size_t cv_folds = 10;
    double train_fraction = 0.8;
    std::optional<MetricKind> metric;  // default: AUC / SMAPE by task
    bool mape_as_fraction = false;
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    ModelConfig model_params;

    void validate() const {
        if (hidden_sizes.empty()) throw ConfigError("config: hidden_sizes must be non-empty");
        if (top_k.empty()) throw ConfigError("config: top_k must be non-empty");
        if (models.empty()) throw ConfigError("config: models must be non-empty");
        if (cv_folds < 2) throw ConfigError("config: cv_folds must be >= 2");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw ConfigError("config: train_fraction must be in (0,1)");
        rbm.validate();
    }
};

inline ExperimentConfig parse_experiment_config(const ordered_json& j) {
    ExperimentConfig c;
    c.dataset_path = j.value("dataset", std::string());
    c.recipe_path = j.value("recipe", std::string());
    if (!j.contains("hidden_sizes")) throw ConfigError("config: missing hidden_sizes");
    c.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
    if (j.contains("rbm")) {
        const auto& r = j["rbm"];
        c.rbm.learning_rate = r.value("learning_rate", c.rbm.learning_rate);
        c.rbm.epochs = r.value("epochs", c.rbm.epochs);
        c.rbm.cd_steps = r.value("cd_steps", c.rbm.cd_steps);
        c.rbm.batch_size = r.value("batch_size", c.rbm.batch_size);
        c.rbm.init_weight_scale = r.value("init_weight_scale", c.rbm.init_weight_scale);
    }
    if (!j.contains("top_k")) throw ConfigError("config: missing top_k");
    c.top_k = j.at("top_k").get<std::vector<std::size_t>>();
    c.t_test_k = j.value("t_test_k", 0);
    if (j.contains("models"))
        for (const auto& m : j["models"]) c.models.push_back(model_kind_from_name(m.get<std::string>()));
    c.cv_folds = j.value("cv_folds", 10);
    c.train_fraction = j.value("train_fraction", 0.8);
    if (j.contains("metric")) {
        std::string m = j["metric"].get<std::string>();
        if (m == "auc") c.metric = MetricKind::Auc;
        else if (m == "smape") c.metric = MetricKind::Smape;
        else if (m == "mape") c.metric = MetricKind::Mape;
        else throw ConfigError("config: unknown metric '" + m + "'");
    }
    c.mape_as_fraction = j.value("mape_as_fraction", false);
    c.seed = j.value("seed", 42);
    c.out_dir = j.value("out_dir", std::string("out"));
    if (j.contains("model_params")) {
        const auto& p = j["model_params"];
        c.model_params.logistic_l2 = p.value("logistic_l2", c.model_params.logistic_l2);
        c.model_params.tree_max_depth = p.value("tree_max_depth", c.model_params.tree_max_depth);
        c.model_params.tree_min_leaf = p.value("tree_min_leaf", c.model_params.tree_min_leaf);
        c.model_params.linear_lambda = p.value("linear_lambda", c.model_params.linear_lambda);
        c.model_params.svr_c = p.value("svr_c", c.model_params.svr_c);
        c.model_params.svr_epsilon = p.value("svr_epsilon", c.model_params.svr_epsilon);
        c.model_params.mlp_hidden = p.value("mlp_hidden", c.model_params.mlp_hidden);
        c.model_params.mlp_lr = p.value("mlp_lr", c.model_params.mlp_lr);
        c.model_params.mlp_epochs = p.value("mlp_epochs", c.model_params.mlp_epochs);
        c.model_params.mlp_batch = p.value("mlp_batch", c.model_params.mlp_batch);
    }
    return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return parse_experiment_config(j);
}

// Full-precision echo of every setting that influenced the run, ledger
// defaults included, so a report is self-describing.
inline ordered_json config_echo(const ExperimentConfig& c, TaskKind task, MetricKind metric) {
    ordered_json j;
    j["dataset"] = c.dataset_path;
    j["recipe"] = c.recipe_path;
    j["task"] = task == TaskKind::Classification ? "classification" : "regression";
    j["metric"] = metric_kind_name(metric);
    j["mape_as_fraction"] = c.mape_as_fraction;
    j["hidden_sizes"] = c.hidden_sizes;
    j["rbm"] = {{"learning_rate", c.rbm.learning_rate},
                {"epochs", c.rbm.epochs},
                {"cd_steps", c.rbm.cd_steps},
                {"batch_size", c.rbm.batch_size},
                {"init_weight_scale", c.rbm.init_weight_scale}};
    j["top_k"] = c.top_k;
    j["t_test_k"] = c.t_test_k;
    ordered_json models = ordered_json::array();
    for (ModelKind m : c.models) models.push_back(model_kind_name(m));
    j["models"] = std::move(models);
    j["cv_folds"] = c.cv_folds;
    j["train_fraction"] = c.train_fraction;
    j["seed"] = c.seed;
    j["model_params"] = {{"logistic_l2", c.model_params.logistic_l2},
                         {"tree_max_depth", c.model_params.tree_max_depth},
                         {"tree_min_leaf", c.model_params.tree_min_leaf},
                         {"linear_lambda", c.model_params.linear_lambda},
                         {"svr_c", c.model_params.svr_c},
                         {"svr_epsilon", c.model_params.svr_epsilon},
                         {"mlp_hidden", c.model_params.mlp_hidden},
                         {"mlp_lr", c.model_params.mlp_lr},
                         {"mlp_epochs", c.model_params.mlp_epochs},
                         {"mlp_batch", c.model_params.mlp_batch}};
    j["rng_algorithm"] = RngStream::algorithm();
    return j;
}

// ---------------------------------------------------------------------------
// run structure

struct CellResult {
    ModelKind model;
    std::size_t k = 0;
    double holdout_without = 0.0;
    double holdout_ega = 0.0;
    double holdout_wald = 0.0;
    FoldScores cv_ega;
    FoldScores cv_wald;
    TTestResult ttest;
};

// Training-side artifacts, exposed so leakage can be audited directly.
struct ExperimentArtifacts {
    Dataset structural;
    SplitIndices split;
    FittedRecipe fitted;
    Dataset train;    // statistical steps applied (standardized, resampled)
    Dataset holdout;  // transformed with training statistics only
    MinMaxStats minmax;
    DbnaModel dbna;
    std::vector<std::vector<double>> dbna_layer_errors;
    ImportanceVector ega_scores;
    WaldRanking wald_scores;
};

struct ComparisonReport {
    TaskKind task = TaskKind::Classification;
    MetricKind metric = MetricKind::Auc;
    std::vector<std::string> feature_names;
    ExperimentArtifacts artifacts;
    std::vector<CellResult> cells;
    SelectionDecision decision;
    std::size_t decision_k = 0;
    ordered_json config;
};

namespace detail {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("stage ") + name + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string("stage ") + name + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string("stage ") + name + ": " + e.what());
    }
}

inline Matrix select_columns(const Matrix& m, const std::vector<std::size_t>& cols) {
    Matrix out(m.rows(), cols.size());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t j = 0; j < cols.size(); ++j) out(r, j) = m(r, cols[j]);
    return out;
}

}  // namespace detail

// Stages up to and including the two rankings: recipe, split, training-side
// statistics, autoencoder training, attribution, Wald. Everything in the
// returned artifacts is fit exclusively on the training rows.
inline ExperimentArtifacts run_training_stages(const Dataset& raw, const Recipe& recipe,
                                               const ExperimentConfig& config) {
    const TaskKind task = recipe.task;
    RngStream rng(config.seed);
    ExperimentArtifacts art;

    art.structural = detail::stage("recipe", [&] { return apply_structural(raw, recipe); });
    if (!art.structural.has_target)
        throw ConfigError("stage recipe: recipe does not set a target column");

    detail::stage("split", [&] {
        RngStream split_rng = rng.split("split");
        art.split = stratified_split(art.structural.target, config.train_fraction, split_rng, task);
        return 0;
    });

    detail::stage("training-statistics", [&] {
        Dataset train_struct = take_rows(art.structural, art.split.train);
        Dataset holdout_struct = take_rows(art.structural, art.split.holdout);
        RngStream stat_rng = rng.split("stats");
        auto [train, fitted] = fit_statistical(train_struct, recipe, stat_rng);
        art.train = std::move(train);
        art.fitted = std::move(fitted);
        art.holdout = transform_statistical(holdout_struct, art.fitted);
        return 0;
    });

    detail::stage("dbna", [&] {
        auto [train01, minmax] = minmax_rescale(art.train.features);
        art.minmax = std::move(minmax);
        DbnaTrainConfig dcfg;
        dcfg.hidden_sizes = config.hidden_sizes;
        dcfg.rbm = config.rbm;
        RngStream dbna_rng = rng.split("dbna");
        DbnaTrainResult r = train_dbna(train01, dcfg, dbna_rng);
        art.dbna = std::move(r.model);
        art.dbna_layer_errors = std::move(r.layer_epoch_errors);
        return 0;
    });

    detail::stage("attribution", [&] {
        art.ega_scores = ega(collect_weights(art.dbna));
        return 0;
    });

    detail::stage("wald", [&] {
        art.wald_scores = wald_rank(art.train.features, art.train.target, task);
        return 0;
    });
    return art;
}

// The experiment on an in-memory dataset. `raw` is the loaded CSV content;
// the recipe decides the task kind.
inline ComparisonReport run_experiment_on(const Dataset& raw, const Recipe& recipe,
                                          const ExperimentConfig& config) {
    config.validate();
    const TaskKind task = recipe.task;
    const MetricKind metric = config.metric.value_or(
        task == TaskKind::Classification ? MetricKind::Auc : MetricKind::Smape);
    if (task == TaskKind::Classification && metric != MetricKind::Auc)
        throw ConfigError("classification experiments use the AUC metric");
    if (task == TaskKind::Regression && metric == MetricKind::Auc)
        throw ConfigError("regression experiments use SMAPE or MAPE");

    ComparisonReport report;
    report.task = task;
    report.metric = metric;
    report.config = config_echo(config, task, metric);

    RngStream rng(config.seed);
    report.artifacts = run_training_stages(raw, recipe, config);
    ExperimentArtifacts& art = report.artifacts;
    const std::size_t n_features = art.structural.n_features();
    for (const auto& c : art.structural.schema) report.feature_names.push_back(c.name);
    for (std::size_t k : config.top_k)
        if (k < 1 || k > n_features)
            throw ConfigError("config: top_k value " + std::to_string(k) +
                              " out of range for " + std::to_string(n_features) + " features");
    const std::size_t decision_k = config.t_test_k == 0 ? config.top_k.front() : config.t_test_k;
    report.decision_k = decision_k;

    // holdout scoring and the CV t-test per (model, k) cell
    detail::stage("evaluation", [&] {
        auto metric_value = [&](const std::vector<double>& pred, const std::vector<double>& truth) {
            switch (metric) {
                case MetricKind::Auc: return auc(pred, truth);
                case MetricKind::Smape: return smape(pred, truth);
                case MetricKind::Mape: return mape(pred, truth, config.mape_as_fraction);
            }
            return 0.0;
        };
        std::vector<std::size_t> all_features(n_features);
        std::iota(all_features.begin(), all_features.end(), std::size_t{0});

        for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
            ModelKind kind = config.models[mi];
            ModelConfig mcfg = config.model_params;
            mcfg.kind = kind;

            auto holdout_score = [&](const std::vector<std::size_t>& cols, std::uint64_t seed) {
                FittedModel m = fit_model(detail::select_columns(art.train.features, cols),
                                          art.train.target, task, mcfg, seed);
                return metric_value(predict(m, detail::select_columns(art.holdout.features, cols)),
                                    art.holdout.target);
            };
            double without = holdout_score(all_features, rng.split("holdout-all").split(mi).seed());

            for (std::size_t k : config.top_k) {
                CellResult cell;
                cell.model = kind;
                cell.k = k;
                cell.holdout_without = without;

                TopK ega_top = top_k(art.ega_scores, k);
                std::vector<std::size_t> wald_top(art.wald_scores.ranking.begin(),
                                                  art.wald_scores.ranking.begin() +
                                                      static_cast<std::ptrdiff_t>(k));
                cell.holdout_ega =
                    holdout_score(ega_top.indices, rng.split("holdout-ega").split(mi).split(k).seed());
                cell.holdout_wald =
                    holdout_score(wald_top, rng.split("holdout-wald").split(mi).split(k).seed());

                // same fold stream for both methods: identical fold assignment
                RngStream cv_rng = rng.split("cv").split(mi).split(k);
                RngStream cv_rng_b = cv_rng;
                cell.cv_ega = kfold_cv(art.structural, ega_top.indices, task, mcfg, config.cv_folds,
                                       cv_rng, metric, &recipe, config.mape_as_fraction, "ega");
                cell.cv_wald = kfold_cv(art.structural, wald_top, task, mcfg, config.cv_folds,
                                        cv_rng_b, metric, &recipe, config.mape_as_fraction, "wald");
                cell.ttest = two_sample_t_test(cell.cv_ega, cell.cv_wald);
                report.cells.push_back(std::move(cell));
            }
        }
        return 0;
    });

    detail::stage("selection", [&] {
        std::vector<MethodComparison> comparisons;
        for (const CellResult& cell : report.cells) {
            if (cell.k != decision_k) continue;
            MethodComparison mc;
            mc.model = cell.model;
            mc.mean_a = cell.cv_ega.mean_value();
            mc.mean_b = cell.cv_wald.mean_value();
            mc.ttest = cell.ttest;
            comparisons.push_back(mc);
        }
        report.decision = select_better_method(comparisons, task, "EGA", "Wald chi-square");
        return 0;
    });

    return report;
}

inline ComparisonReport run_experiment(const ExperimentConfig& config) {
    if (config.dataset_path.empty() || config.recipe_path.empty())
        throw ConfigError("config: dataset and recipe paths are required");
    Recipe recipe = detail::stage("load-recipe", [&] { return load_recipe_file(config.recipe_path); });
    Dataset raw = detail::stage("load-dataset", [&] { return load_csv_file(config.dataset_path); });
    return run_experiment_on(raw, recipe, config);
}

// ---------------------------------------------------------------------------
// chart data

// Top-k rows (rank, feature, percent) in descending order plus a cumulative
// percent column; row count is exactly k.
inline void emit_chart_data(std::ostream& out, const ImportanceVector& importance,
                            const std::vector<std::string>& names, std::size_t k) {
    TopK top = top_k(importance, k);
    out << "rank,feature_name,score_percent,cumulative_percent\n";
    double cumulative = 0.0;
    for (std::size_t pos = 0; pos < top.indices.size(); ++pos) {
        std::size_t f = top.indices[pos];
        cumulative += importance.scores[f];
        out << (pos + 1) << ',' << detail::quote_if_needed(names[f]) << ','
            << detail::format_double(importance.scores[f]) << ','
            << detail::format_double(cumulative) << '\n';
    }
}

// ---------------------------------------------------------------------------
// report persistence

namespace detail {

inline ordered_json fold_scores_json(const FoldScores& f) {
    return {{"method", f.method},
            {"model", model_kind_name(f.model)},
            {"metric", metric_kind_name(f.metric)},
            {"values", f.values},
            {"mean", f.mean_value()}};
}

}  // namespace detail

inline ordered_json report_to_json(const ComparisonReport& r) {
    ordered_json j;
    j["config"] = r.config;
    j["n_features"] = r.feature_names.size();
    j["n_samples"] = r.artifacts.structural.n_samples();
    j["split"] = {{"train", r.artifacts.split.train.size()},
                  {"holdout", r.artifacts.split.holdout.size()}};
    j["rankings"] = {
        {"ega", ranking_to_json(r.feature_names, r.artifacts.ega_scores.scores,
                                r.artifacts.ega_scores.ranking, "importance_percent")},
        {"wald", ranking_to_json(r.feature_names, r.artifacts.wald_scores.statistics,
                                 r.artifacts.wald_scores.ranking, "wald_chi_square")}};
    j["cells"] = ordered_json::array();
    for (const CellResult& c : r.cells) {
        j["cells"].push_back({{"model", model_kind_name(c.model)},
                              {"k", c.k},
                              {"holdout_without_selection", c.holdout_without},
                              {"holdout_ega", c.holdout_ega},
                              {"holdout_wald", c.holdout_wald},
                              {"cv_ega", detail::fold_scores_json(c.cv_ega)},
                              {"cv_wald", detail::fold_scores_json(c.cv_wald)},
                              {"t_test",
                               {{"t", c.ttest.t_statistic},
                                {"p", c.ttest.p_value},
                                {"df", c.ttest.degrees_of_freedom},
                                {"significant_at_5pct", c.ttest.significant_at_5pct}}}});
    }
    j["selection"] = {{"winner", r.decision.winner},
                      {"deciding_model", model_kind_name(r.decision.deciding_model)},
                      {"k", r.decision_k},
                      {"significant", r.decision.significant},
                      {"rationale", r.decision.rationale}};
    return j;
}

// tables.csv mirrors the published comparison tables: one row per (model, k)
// with the two method means, t, and p.
inline void write_tables_csv(std::ostream& out, const ComparisonReport& r) {
    out << "model,k,metric,holdout_without_selection,holdout_ega,holdout_wald,"
           "cv_mean_ega,cv_mean_wald,t_score,p_value,df\n";
    for (const CellResult& c : r.cells) {
        out << model_kind_name(c.model) << ',' << c.k << ',' << metric_kind_name(r.metric) << ','
            << detail::format_double(c.holdout_without) << ','
            << detail::format_double(c.holdout_ega) << ',' << detail::format_double(c.holdout_wald)
            << ',' << detail::format_double(c.cv_ega.mean_value()) << ','
            << detail::format_double(c.cv_wald.mean_value()) << ','
            << detail::format_double(c.ttest.t_statistic) << ','
            << detail::format_double(c.ttest.p_value) << ',' << c.ttest.degrees_of_freedom << '\n';
    }
}

// Writes report.json, tables.csv, the two ranking files, chart data per k,
// and the trained autoencoder. On failure every file created here is removed.
inline std::vector<std::string> write_report_files(const ComparisonReport& r,
                                                   const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, auto&& writer) {
        fs::create_directories(out_dir);
        std::string path = (fs::path(out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write '" + path + "'");
        writer(out);
        if (!out) throw DataError("write failed for '" + path + "'");
        written.push_back(path);
    };
    try {
        emit("report.json", [&](std::ostream& o) { o << report_to_json(r).dump(2) << '\n'; });
        emit("tables.csv", [&](std::ostream& o) { write_tables_csv(o, r); });
        emit("importance_ega.csv", [&](std::ostream& o) {
            write_ranking_csv(o, r.feature_names, r.artifacts.ega_scores.scores,
                              r.artifacts.ega_scores.ranking);
        });
        emit("importance_wald.csv", [&](std::ostream& o) {
            write_ranking_csv(o, r.feature_names, r.artifacts.wald_scores.statistics,
                              r.artifacts.wald_scores.ranking);
        });
        for (std::size_t k : r.config.at("top_k").get<std::vector<std::size_t>>())
            emit("chart_top" + std::to_string(k) + ".csv", [&](std::ostream& o) {
                emit_chart_data(o, r.artifacts.ega_scores, r.feature_names, k);
            });
        emit("dbna_model.json", [&](std::ostream& o) {
            o << dbna_to_json(r.artifacts.dbna).dump(2) << '\n';
        });
    } catch (...) {
        for (const std::string& path : written) std::remove(path.c_str());
        throw;
    }
    return written;
}

}  // namespace xdbn
