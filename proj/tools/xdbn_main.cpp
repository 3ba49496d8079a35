// Experiment CLI: train deep-belief autoencoders, rank features by
// connection-weight attribution or Wald chi-square, compare the two methods
// under cross-validation, and emit chart-ready data.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "xdbn/pipeline.hpp"

namespace {

using namespace xdbn;

void print_report_summary(const ComparisonReport& report) {
    std::printf("features: %zu   samples: %zu (train %zu / holdout %zu)\n",
                report.feature_names.size(), report.artifacts.structural.n_samples(),
                report.artifacts.split.train.size(), report.artifacts.split.holdout.size());
    std::printf("%-10s %4s  %-9s %10s %10s %10s %12s %10s\n", "model", "k", "metric", "no-select",
                "ega", "wald", "t", "p");
    for (const CellResult& cell : report.cells) {
        std::printf("%-10s %4zu  %-9s %10.4f %10.4f %10.4f %12.4f %10.4g\n",
                    model_kind_name(cell.model), cell.k, metric_kind_name(report.metric),
                    cell.holdout_without, cell.holdout_ega, cell.holdout_wald,
                    cell.ttest.t_statistic, cell.ttest.p_value);
    }
    std::printf("selected method: %s (deciding model: %s, k=%zu, significant at 5%%: %s)\n",
                report.decision.winner.c_str(), model_kind_name(report.decision.deciding_model),
                report.decision_k, report.decision.significant ? "yes" : "no");
    std::printf("rationale: %s\n", report.decision.rationale.c_str());
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out_dir) {
    ExperimentConfig config = load_experiment_config(config_path);
    if (seed) config.seed = *seed;
    if (out_dir) config.out_dir = *out_dir;
    ComparisonReport report = run_experiment(config);
    auto written = write_report_files(report, config.out_dir);
    print_report_summary(report);
    for (const auto& path : written) std::printf("wrote %s\n", path.c_str());
    return 0;
}

int cmd_rank(const std::string& config_path, const std::string& method,
             std::optional<std::uint64_t> seed, std::optional<std::string> out_dir) {
    ExperimentConfig config = load_experiment_config(config_path);
    if (seed) config.seed = *seed;
    if (out_dir) config.out_dir = *out_dir;
    config.validate();
    Recipe recipe = load_recipe_file(config.recipe_path);
    Dataset raw = load_csv_file(config.dataset_path);
    ExperimentArtifacts art = run_training_stages(raw, recipe, config);

    std::vector<std::string> names;
    for (const auto& c : art.structural.schema) names.push_back(c.name);

    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    auto print_top = [&](const char* label, const std::vector<double>& scores,
                         const std::vector<std::size_t>& ranking) {
        std::printf("%s ranking (top %zu of %zu):\n", label, std::min<std::size_t>(10, names.size()),
                    names.size());
        for (std::size_t pos = 0; pos < std::min<std::size_t>(10, ranking.size()); ++pos)
            std::printf("  %2zu. %-28s %12.6f\n", pos + 1, names[ranking[pos]].c_str(),
                        scores[ranking[pos]]);
    };
    if (method == "ega" || method == "both") {
        std::string path = (fs::path(config.out_dir) / "importance_ega.csv").string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write '" + path + "'");
        write_ranking_csv(out, names, art.ega_scores.scores, art.ega_scores.ranking);
        print_top("EGA", art.ega_scores.scores, art.ega_scores.ranking);
        std::printf("wrote %s\n", path.c_str());
    }
    if (method == "wald" || method == "both") {
        std::string path = (fs::path(config.out_dir) / "importance_wald.csv").string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write '" + path + "'");
        write_ranking_csv(out, names, art.wald_scores.statistics, art.wald_scores.ranking);
        print_top("Wald chi-square", art.wald_scores.statistics, art.wald_scores.ranking);
        std::printf("wrote %s\n", path.c_str());
    }
    std::string model_path = (fs::path(config.out_dir) / "dbna_model.json").string();
    save_json_file(dbna_to_json(art.dbna), model_path);
    std::printf("wrote %s\n", model_path.c_str());
    return 0;
}

int cmd_synth(std::size_t samples, std::size_t informative, std::size_t noise,
              const std::string& task, std::uint64_t seed, const std::string& out_path,
              const std::string& mask_path) {
    SyntheticSpec spec;
    spec.n_samples = samples;
    spec.n_informative = informative;
    spec.n_noise = noise;
    spec.seed = seed;
    if (task == "classification") spec.task = TaskKind::Classification;
    else if (task == "regression") spec.task = TaskKind::Regression;
    else throw ConfigError("synth: task must be classification or regression");

    SyntheticData data = generate_synthetic(spec);
    if (auto dir = std::filesystem::path(out_path).parent_path(); !dir.empty())
        std::filesystem::create_directories(dir);
    save_csv_file(data.dataset, out_path);
    std::printf("wrote %s (%zu samples, %zu features)\n", out_path.c_str(),
                data.dataset.n_samples(), data.dataset.n_features());
    if (!mask_path.empty()) {
        ordered_json j;
        j["n_features"] = data.informative_mask.size();
        j["informative"] = ordered_json::array();
        for (std::size_t i = 0; i < data.informative_mask.size(); ++i)
            if (data.informative_mask[i]) j["informative"].push_back(i);
        save_json_file(j, mask_path);
        std::printf("wrote %s\n", mask_path.c_str());
    }
    return 0;
}

int cmd_chart(const std::string& importance_path, std::size_t k, const std::string& out_path) {
    std::ifstream in(importance_path, std::ios::binary);
    if (!in) throw DataError("cannot open ranking file '" + importance_path + "'");
    RankingFile ranking = read_ranking_csv(in);

    ImportanceVector importance;
    importance.scores = ranking.scores;
    importance.ranking.resize(ranking.scores.size());
    std::iota(importance.ranking.begin(), importance.ranking.end(), std::size_t{0});

    if (auto dir = std::filesystem::path(out_path).parent_path(); !dir.empty())
        std::filesystem::create_directories(dir);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + out_path + "'");
    emit_chart_data(out, importance, ranking.names, k);
    std::printf("wrote %s (%zu rows)\n", out_path.c_str(), k);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep-belief autoencoder feature attribution workbench"};
    app.require_subcommand(1);

    std::string config_path, method = "both", task = "classification";
    std::string out_path, mask_path, importance_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    std::size_t samples = 500, informative = 3, noise = 3, chart_k = 10;
    std::uint64_t synth_seed = 0;

    CLI::App* run = app.add_subcommand("run", "execute a full comparison experiment");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    {
        auto* opt_seed = run->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t s) { seed_override = s; }, "master seed override");
        auto* opt_out = run->add_option_function<std::string>(
            "--out", [&](const std::string& s) { out_override = s; }, "output directory override");
        (void)opt_seed;
        (void)opt_out;
    }

    CLI::App* rank = app.add_subcommand("rank", "compute the two feature rankings only");
    rank->add_option("--config", config_path, "experiment config JSON")->required();
    rank->add_option("--method", method, "ega, wald, or both")
        ->check(CLI::IsMember({"ega", "wald", "both"}));
    rank->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed_override = s; }, "master seed override");
    rank->add_option_function<std::string>(
        "--out", [&](const std::string& s) { out_override = s; }, "output directory override");

    CLI::App* synth = app.add_subcommand("synth", "generate a planted-ground-truth dataset");
    synth->add_option("--samples", samples, "sample count");
    synth->add_option("--informative", informative, "informative feature count");
    synth->add_option("--noise", noise, "noise feature count");
    synth->add_option("--task", task, "classification or regression")
        ->check(CLI::IsMember({"classification", "regression"}));
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", out_path, "output CSV path")->required();
    synth->add_option("--mask", mask_path, "ground-truth mask JSON path");

    CLI::App* chart = app.add_subcommand("chart", "emit top-k chart data from a ranking CSV");
    chart->add_option("--importance", importance_path, "ranking CSV")->required();
    chart->add_option("--k", chart_k, "number of top features")->required();
    chart->add_option("--out", out_path, "output CSV path")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config_path, seed_override, out_override);
        if (rank->parsed()) return cmd_rank(config_path, method, seed_override, out_override);
        if (synth->parsed())
            return cmd_synth(samples, informative, noise, task, synth_seed, out_path, mask_path);
        if (chart->parsed()) return cmd_chart(importance_path, chart_k, out_path);
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const xdbn::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const xdbn::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const xdbn::NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
