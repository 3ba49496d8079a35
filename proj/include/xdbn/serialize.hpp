#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xdbn/attribution.hpp"
#include "xdbn/baselines.hpp"
#include "xdbn/csv.hpp"
#include "xdbn/dbna.hpp"
#include "xdbn/error.hpp"
#include "xdbn/models.hpp"
#include "xdbn/rbm.hpp"

// JSON persistence (shape headers + flat full-precision arrays) and the
// shared ranking CSV/JSON schema used by both ranking methods.

namespace xdbn {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// RBM / DBNA

inline ordered_json rbm_to_json(const RbmParams& p) {
    ordered_json j;
    j["n_visible"] = p.n_visible();
    j["n_hidden"] = p.n_hidden();
    j["weights"] = p.weights.data();
    j["visible_bias"] = p.visible_bias;
    j["hidden_bias"] = p.hidden_bias;
    return j;
}

inline RbmParams rbm_from_json(const ordered_json& j) {
    RbmParams p;
    std::size_t nv = j.at("n_visible").get<std::size_t>();
    std::size_t nh = j.at("n_hidden").get<std::size_t>();
    auto flat = j.at("weights").get<std::vector<double>>();
    if (flat.size() != nv * nh) throw DataError("rbm_from_json: weight array size mismatch");
    p.weights = Matrix(nv, nh);
    p.weights.data() = std::move(flat);
    p.visible_bias = j.at("visible_bias").get<std::vector<double>>();
    p.hidden_bias = j.at("hidden_bias").get<std::vector<double>>();
    p.validate();
    return p;
}

inline ordered_json dbna_to_json(const DbnaModel& m) {
    ordered_json j;
    j["layer_sizes"] = m.layer_sizes;
    j["layers"] = ordered_json::array();
    for (const auto& layer : m.layers) j["layers"].push_back(rbm_to_json(layer));
    return j;
}

inline DbnaModel dbna_from_json(const ordered_json& j) {
    DbnaModel m;
    m.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    for (const auto& lj : j.at("layers")) m.layers.push_back(rbm_from_json(lj));
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// fitted models (kind tag + parameter payload)

inline ordered_json model_to_json(const FittedModel& m) {
    ordered_json j;
    j["kind"] = model_kind_name(m.kind);
    j["n_features"] = m.n_features;
    j["meta"] = {{"iterations", m.meta.iterations},
                 {"converged", m.meta.converged},
                 {"seed", m.meta.seed}};
    if (const auto* lg = std::get_if<LogisticModel>(&m.params)) {
        j["beta"] = lg->beta;
    } else if (const auto* tree = std::get_if<TreeModel>(&m.params)) {
        ordered_json nodes = ordered_json::array();
        for (const auto& n : tree->nodes)
            nodes.push_back({{"leaf", n.leaf},
                             {"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"value", n.value}});
        j["nodes"] = std::move(nodes);
    } else if (const auto* lin = std::get_if<LinearModel>(&m.params)) {
        j["coef"] = lin->coef;
        j["intercept"] = lin->intercept;
    } else if (const auto* svr = std::get_if<SvrModel>(&m.params)) {
        j["w"] = svr->w;
        j["b"] = svr->b;
    } else if (const auto* mlp = std::get_if<MlpModel>(&m.params)) {
        j["classification"] = mlp->classification;
        j["hidden"] = mlp->w1.cols();
        j["w1"] = mlp->w1.data();
        j["b1"] = mlp->b1;
        j["w2"] = mlp->w2;
        j["b2"] = mlp->b2;
    }
    return j;
}

inline FittedModel model_from_json(const ordered_json& j) {
    FittedModel m;
    m.kind = model_kind_from_name(j.at("kind").get<std::string>());
    m.n_features = j.at("n_features").get<std::size_t>();
    if (j.contains("meta")) {
        m.meta.iterations = j["meta"].value("iterations", 0);
        m.meta.converged = j["meta"].value("converged", true);
        m.meta.seed = j["meta"].value("seed", 0);
    }
    switch (m.kind) {
        case ModelKind::Logistic:
            m.params = LogisticModel{j.at("beta").get<std::vector<double>>()};
            break;
        case ModelKind::Tree: {
            TreeModel tree;
            for (const auto& nj : j.at("nodes")) {
                TreeModel::Node n;
                n.leaf = nj.at("leaf").get<bool>();
                n.feature = nj.at("feature").get<std::size_t>();
                n.threshold = nj.at("threshold").get<double>();
                n.left = nj.at("left").get<std::size_t>();
                n.right = nj.at("right").get<std::size_t>();
                n.value = nj.at("value").get<double>();
                tree.nodes.push_back(n);
            }
            m.params = std::move(tree);
            break;
        }
        case ModelKind::Linear:
        case ModelKind::Ridge:
        case ModelKind::Lasso:
            m.params = LinearModel{j.at("coef").get<std::vector<double>>(),
                                   j.at("intercept").get<double>()};
            break;
        case ModelKind::Svr:
            m.params = SvrModel{j.at("w").get<std::vector<double>>(), j.at("b").get<double>()};
            break;
        case ModelKind::Mlp: {
            MlpModel mlp;
            mlp.classification = j.at("classification").get<bool>();
            std::size_t h = j.at("hidden").get<std::size_t>();
            auto flat = j.at("w1").get<std::vector<double>>();
            mlp.w1 = Matrix(m.n_features, h);
            if (flat.size() != mlp.w1.size()) throw DataError("model_from_json: w1 size mismatch");
            mlp.w1.data() = std::move(flat);
            mlp.b1 = j.at("b1").get<std::vector<double>>();
            mlp.w2 = j.at("w2").get<std::vector<double>>();
            mlp.b2 = j.at("b2").get<double>();
            m.params = std::move(mlp);
            break;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// ranking schema, shared by the attribution scores and the Wald statistics

inline void write_ranking_csv(std::ostream& out, const std::vector<std::string>& names,
                              const std::vector<double>& scores,
                              const std::vector<std::size_t>& ranking) {
    if (names.size() != scores.size() || ranking.size() != scores.size())
        throw DataError("write_ranking_csv: length mismatch");
    out << "feature_name,score_percent,rank\n";
    for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
        std::size_t f = ranking[pos];
        out << detail::quote_if_needed(names[f]) << ',' << detail::format_double(scores[f]) << ','
            << (pos + 1) << '\n';
    }
}

inline ordered_json ranking_to_json(const std::vector<std::string>& names,
                                    const std::vector<double>& scores,
                                    const std::vector<std::size_t>& ranking,
                                    const std::string& score_kind) {
    ordered_json j;
    j["score_kind"] = score_kind;
    j["features"] = ordered_json::array();
    for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
        std::size_t f = ranking[pos];
        j["features"].push_back(
            {{"feature_name", names[f]}, {"score", scores[f]}, {"rank", pos + 1}});
    }
    return j;
}

struct RankingFile {
    std::vector<std::string> names;    // in rank order
    std::vector<double> scores;        // in rank order
};

inline RankingFile read_ranking_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("ranking CSV is empty");
    RankingFile out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line, line_no);
        if (cells.size() != 3)
            throw DataError("ranking CSV line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected 3");
        double score;
        if (!detail::parse_double(cells[1], score))
            throw DataError("ranking CSV line " + std::to_string(line_no) + ": bad score");
        out.names.push_back(cells[0]);
        out.scores.push_back(score);
    }
    if (out.names.empty()) throw DataError("ranking CSV has no rows");
    return out;
}

inline void save_json_file(const ordered_json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out << j.dump(2) << '\n';
}

inline ordered_json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file '" + path + "'");
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("file '" + path + "': " + e.what());
    }
    return j;
}

}  // namespace xdbn
