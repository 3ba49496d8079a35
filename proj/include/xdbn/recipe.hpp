#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xdbn/dataset.hpp"
#include "xdbn/error.hpp"
#include "xdbn/preprocess.hpp"
#include "xdbn/rng.hpp"

// Declarative per-dataset preparation. A recipe is an ordered list of steps;
// structural steps (drop/map/one-hot/target) are pure column surgery, while
// statistical steps (standardize/resample) learn from or change the row set
// and are therefore fit on training rows only when a pipeline splits data.

namespace xdbn {

enum class StepKind { DropColumn, MapValues, OneHot, Standardize, SetTarget, Resample };

struct RecipeStep {
    StepKind kind;
    std::vector<std::string> columns;                       // drop_column, standardize
    std::string column;                                     // map_values, one_hot, set_target
    std::vector<std::pair<std::string, std::string>> value_map;  // map_values, ordered
    std::optional<std::vector<std::string>> categories;     // one_hot
    std::optional<std::vector<std::string>> output_names;   // one_hot
    bool all_numeric = false;                               // standardize
    bool constant_passthrough = false;                      // standardize
    std::string transform;                                  // set_target: "" or "log1p"
    std::string method;                                     // resample: "smote"/"over_under"
    std::size_t smote_k = 5;
    double ratio = 1.0;                                     // smote minority:majority target
    double positive_fraction = 0.5;                         // over_under
    std::size_t total = 0;                                  // over_under (0 = original size)
};

struct Recipe {
    std::string name;
    TaskKind task = TaskKind::Classification;
    std::vector<RecipeStep> steps;
};

inline bool is_statistical(StepKind k) {
    return k == StepKind::Standardize || k == StepKind::Resample;
}

// ---------------------------------------------------------------------------
// JSON parsing

namespace detail {

inline std::string json_scalar_label(const nlohmann::json& v, const char* ctx) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return category_label(v.get<double>());
    throw ConfigError(std::string(ctx) + ": expected string or number");
}

inline std::vector<std::string> json_label_list(const nlohmann::json& v, const char* ctx) {
    if (!v.is_array()) throw ConfigError(std::string(ctx) + ": expected array");
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(json_scalar_label(e, ctx));
    return out;
}

}  // namespace detail

inline Recipe parse_recipe(const nlohmann::json& j) {
    Recipe r;
    if (!j.is_object()) throw ConfigError("recipe: top level must be an object");
    r.name = j.value("name", std::string("unnamed"));
    std::string task = j.value("task", std::string("classification"));
    if (task == "classification") r.task = TaskKind::Classification;
    else if (task == "regression") r.task = TaskKind::Regression;
    else throw ConfigError("recipe: unknown task '" + task + "'");
    if (!j.contains("steps") || !j["steps"].is_array())
        throw ConfigError("recipe: missing steps array");

    for (const auto& sj : j["steps"]) {
        RecipeStep s;
        std::string op = sj.value("op", std::string());
        if (op == "drop_column") {
            s.kind = StepKind::DropColumn;
            if (sj.contains("columns")) s.columns = detail::json_label_list(sj["columns"], "drop_column");
            else if (sj.contains("column")) s.columns = {sj["column"].get<std::string>()};
            else throw ConfigError("drop_column: needs column(s)");
        } else if (op == "map_values") {
            s.kind = StepKind::MapValues;
            s.column = sj.at("column").get<std::string>();
            if (!sj.contains("map") || !sj["map"].is_object())
                throw ConfigError("map_values: needs a map object");
            for (const auto& [k, v] : sj["map"].items())
                s.value_map.emplace_back(k, detail::json_scalar_label(v, "map_values"));
        } else if (op == "one_hot") {
            s.kind = StepKind::OneHot;
            s.column = sj.at("column").get<std::string>();
            if (sj.contains("categories"))
                s.categories = detail::json_label_list(sj["categories"], "one_hot categories");
            if (sj.contains("names"))
                s.output_names = detail::json_label_list(sj["names"], "one_hot names");
        } else if (op == "standardize") {
            s.kind = StepKind::Standardize;
            if (sj.contains("columns")) {
                if (sj["columns"].is_string() && sj["columns"].get<std::string>() == "all_numeric")
                    s.all_numeric = true;
                else
                    s.columns = detail::json_label_list(sj["columns"], "standardize");
            } else {
                s.all_numeric = true;
            }
            s.constant_passthrough = sj.value("constant", std::string("error")) == "pass";
        } else if (op == "set_target") {
            s.kind = StepKind::SetTarget;
            s.column = sj.at("column").get<std::string>();
            s.transform = sj.value("transform", std::string());
            if (!s.transform.empty() && s.transform != "log1p")
                throw ConfigError("set_target: unknown transform '" + s.transform + "'");
        } else if (op == "resample") {
            s.kind = StepKind::Resample;
            s.method = sj.at("method").get<std::string>();
            if (s.method == "smote") {
                s.smote_k = sj.value("k", 5);
                s.ratio = sj.value("ratio", 1.0);
            } else if (s.method == "over_under") {
                s.positive_fraction = sj.at("positive_fraction").get<double>();
                s.total = sj.value("total", 0);
            } else {
                throw ConfigError("resample: unknown method '" + s.method + "'");
            }
        } else {
            throw ConfigError("recipe: unknown op '" + op + "'");
        }
        r.steps.push_back(std::move(s));
    }
    return r;
}

inline Recipe load_recipe_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open recipe file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("recipe '" + path + "': " + e.what());
    }
    return parse_recipe(j);
}

// ---------------------------------------------------------------------------
// step application

namespace detail {

inline Dataset step_drop_columns(const Dataset& ds, const std::vector<std::string>& names) {
    std::vector<bool> drop(ds.n_features(), false);
    for (const auto& name : names) drop[ds.col_index(name)] = true;
    Dataset out;
    out.has_target = ds.has_target;
    out.target = ds.target;
    out.target_name = ds.target_name;
    std::size_t keep = 0;
    for (bool d : drop) keep += !d;
    out.features = Matrix(ds.n_samples(), keep);
    std::size_t oc = 0;
    for (std::size_t c = 0; c < ds.n_features(); ++c) {
        if (drop[c]) continue;
        for (std::size_t r = 0; r < ds.n_samples(); ++r) out.features(r, oc) = ds.features(r, c);
        out.schema.push_back(ds.schema[c]);
        ++oc;
    }
    return out;
}

inline Dataset step_map_values(const Dataset& ds, const RecipeStep& s) {
    std::size_t c = ds.col_index(s.column);
    Dataset out = ds;
    std::map<std::string, std::string> table(s.value_map.begin(), s.value_map.end());
    ColumnSpec& spec = out.schema[c];
    if (spec.kind == ColumnKind::Categorical && !spec.labels.empty()) {
        // relabel, merging duplicates while preserving first-occurrence order
        std::vector<std::string> new_labels;
        std::map<std::string, std::size_t> new_code;
        std::vector<std::size_t> remap(spec.labels.size());
        for (std::size_t i = 0; i < spec.labels.size(); ++i) {
            std::string lbl = spec.labels[i];
            auto it = table.find(lbl);
            if (it != table.end()) lbl = it->second;
            auto found = new_code.find(lbl);
            if (found == new_code.end()) {
                found = new_code.emplace(lbl, new_labels.size()).first;
                new_labels.push_back(lbl);
            }
            remap[i] = found->second;
        }
        for (std::size_t r = 0; r < out.n_samples(); ++r) {
            auto code = static_cast<std::size_t>(out.features(r, c));
            if (code >= remap.size())
                throw DataError("map_values: label code out of range in '" + s.column + "'");
            out.features(r, c) = static_cast<double>(remap[code]);
        }
        spec.labels = std::move(new_labels);
    } else {
        for (std::size_t r = 0; r < out.n_samples(); ++r) {
            auto it = table.find(category_label(out.features(r, c)));
            if (it == table.end()) continue;
            char* end = nullptr;
            double v = std::strtod(it->second.c_str(), &end);
            if (end != it->second.c_str() + it->second.size())
                throw ConfigError("map_values: non-numeric replacement '" + it->second +
                                  "' for numeric column '" + s.column + "'");
            out.features(r, c) = v;
        }
    }
    return out;
}

inline Dataset step_set_target(const Dataset& ds, const RecipeStep& s) {
    std::size_t c = ds.col_index(s.column);
    if (ds.schema[c].kind == ColumnKind::Categorical && !ds.schema[c].labels.empty())
        throw DataError("set_target: column '" + s.column + "' is categorical");
    Dataset out;
    out.has_target = true;
    out.target_name = s.column;
    out.target = ds.features.column(c);
    if (s.transform == "log1p")
        for (double& y : out.target) {
            if (y < -1.0 + 1e-300) throw DataError("set_target: log1p of value <= -1");
            y = std::log1p(y);
        }
    out.features = Matrix(ds.n_samples(), ds.n_features() - 1);
    std::size_t oc = 0;
    for (std::size_t src = 0; src < ds.n_features(); ++src) {
        if (src == c) continue;
        for (std::size_t r = 0; r < ds.n_samples(); ++r) out.features(r, oc) = ds.features(r, src);
        out.schema.push_back(ds.schema[src]);
        ++oc;
    }
    return out;
}

inline std::vector<std::size_t> standardize_targets(const Dataset& ds, const RecipeStep& s) {
    std::vector<std::size_t> cols;
    if (s.all_numeric) {
        for (std::size_t c = 0; c < ds.n_features(); ++c)
            if (ds.schema[c].kind == ColumnKind::Numeric) cols.push_back(c);
    } else {
        for (const auto& name : s.columns) cols.push_back(ds.col_index(name));
    }
    return cols;
}

inline Dataset step_resample(const Dataset& ds, const RecipeStep& s, RngStream& rng) {
    if (!ds.has_target) throw DataError("resample: dataset has no target yet");
    if (s.method == "over_under")
        return random_over_under(ds, s.positive_fraction, rng, s.total);

    // SMOTE: synthesize minority rows up to ratio * majority count
    std::vector<std::size_t> pos, neg;
    for (std::size_t r = 0; r < ds.n_samples(); ++r) {
        if (ds.target[r] == 1.0) pos.push_back(r);
        else if (ds.target[r] == 0.0) neg.push_back(r);
        else throw DataError("resample smote: target is not binary 0/1");
    }
    if (pos.empty() || neg.empty()) throw DataError("resample smote: a class is absent");
    const bool pos_minority = pos.size() < neg.size();
    const auto& minority_rows = pos_minority ? pos : neg;
    const auto& majority_rows = pos_minority ? neg : pos;
    auto want = static_cast<std::size_t>(
        std::llround(s.ratio * static_cast<double>(majority_rows.size())));
    if (want <= minority_rows.size()) return ds;

    Matrix minority(minority_rows.size(), ds.n_features());
    for (std::size_t i = 0; i < minority_rows.size(); ++i)
        for (std::size_t c = 0; c < ds.n_features(); ++c)
            minority(i, c) = ds.features(minority_rows[i], c);
    std::size_t k = std::min(s.smote_k, minority_rows.size() - 1);
    Matrix synthetic = smote(minority, k, want - minority_rows.size(), rng);

    Dataset out = ds;
    Matrix grown(ds.n_samples() + synthetic.rows(), ds.n_features());
    for (std::size_t r = 0; r < ds.n_samples(); ++r)
        for (std::size_t c = 0; c < ds.n_features(); ++c) grown(r, c) = ds.features(r, c);
    for (std::size_t r = 0; r < synthetic.rows(); ++r) {
        for (std::size_t c = 0; c < ds.n_features(); ++c)
            grown(ds.n_samples() + r, c) = synthetic(r, c);
        out.target.push_back(pos_minority ? 1.0 : 0.0);
    }
    out.features = std::move(grown);
    out.validate();
    return out;
}

template <typename Fn>
inline auto wrap_step_error(std::size_t index, StepKind kind, Fn&& fn) {
    const char* names[] = {"drop_column", "map_values", "one_hot",
                           "standardize", "set_target", "resample"};
    std::string prefix =
        "recipe step " + std::to_string(index) + " (" + names[static_cast<int>(kind)] + "): ";
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const NumericError& e) {
        throw NumericError(prefix + e.what());
    }
}

}  // namespace detail

// Learned state of the statistical steps, re-applicable to held-out rows.
struct FittedRecipe {
    std::vector<std::pair<std::size_t, StandardizeStats>> standardize_stats;  // step index -> stats
};

// Structural steps only (drop/map/one-hot/target), applied in recipe order.
inline Dataset apply_structural(const Dataset& raw, const Recipe& recipe) {
    Dataset ds = raw;
    for (std::size_t i = 0; i < recipe.steps.size(); ++i) {
        const RecipeStep& s = recipe.steps[i];
        if (is_statistical(s.kind)) continue;
        ds = detail::wrap_step_error(i, s.kind, [&] {
            switch (s.kind) {
                case StepKind::DropColumn: return detail::step_drop_columns(ds, s.columns);
                case StepKind::MapValues: return detail::step_map_values(ds, s);
                case StepKind::OneHot: return one_hot(ds, s.column, s.categories, s.output_names);
                case StepKind::SetTarget: return detail::step_set_target(ds, s);
                default: return ds;
            }
        });
    }
    ds.validate();
    return ds;
}

// Statistical steps fit on (and applied to) the given rows; resampling only
// ever happens here. Returns the transformed data plus the fitted state.
inline std::pair<Dataset, FittedRecipe> fit_statistical(const Dataset& structural,
                                                        const Recipe& recipe, RngStream& rng) {
    Dataset ds = structural;
    FittedRecipe fitted;
    for (std::size_t i = 0; i < recipe.steps.size(); ++i) {
        const RecipeStep& s = recipe.steps[i];
        if (!is_statistical(s.kind)) continue;
        detail::wrap_step_error(i, s.kind, [&] {
            if (s.kind == StepKind::Standardize) {
                auto cols = detail::standardize_targets(ds, s);
                auto [m, stats] = standardize(ds.features, cols, s.constant_passthrough);
                ds.features = std::move(m);
                fitted.standardize_stats.emplace_back(i, std::move(stats));
            } else {
                RngStream child = rng.split("resample@" + std::to_string(i));
                ds = detail::step_resample(ds, s, child);
            }
            return 0;
        });
    }
    ds.validate();
    return {std::move(ds), std::move(fitted)};
}

// Applies previously fitted statistics to held-out rows. No resampling.
inline Dataset transform_statistical(const Dataset& structural, const FittedRecipe& fitted) {
    Dataset ds = structural;
    for (const auto& [idx, stats] : fitted.standardize_stats)
        ds.features = apply_standardize(ds.features, stats);
    ds.validate();
    return ds;
}

// Whole-recipe application: structural then statistical, all rows at once.
// A pure function of (raw, recipe, seed).
inline Dataset apply_recipe(const Dataset& raw, const Recipe& recipe, RngStream& rng) {
    Dataset ds = raw;
    FittedRecipe fitted;
    for (std::size_t i = 0; i < recipe.steps.size(); ++i) {
        const RecipeStep& s = recipe.steps[i];
        ds = detail::wrap_step_error(i, s.kind, [&]() -> Dataset {
            switch (s.kind) {
                case StepKind::DropColumn: return detail::step_drop_columns(ds, s.columns);
                case StepKind::MapValues: return detail::step_map_values(ds, s);
                case StepKind::OneHot: return one_hot(ds, s.column, s.categories, s.output_names);
                case StepKind::SetTarget: return detail::step_set_target(ds, s);
                case StepKind::Standardize: {
                    auto cols = detail::standardize_targets(ds, s);
                    auto [m, stats] = standardize(ds.features, cols, s.constant_passthrough);
                    Dataset next = ds;
                    next.features = std::move(m);
                    return next;
                }
                case StepKind::Resample: {
                    RngStream child = rng.split("resample@" + std::to_string(i));
                    return detail::step_resample(ds, s, child);
                }
            }
            throw ConfigError("unreachable step kind");
        });
    }
    ds.validate();
    return ds;
}

}  // namespace xdbn
