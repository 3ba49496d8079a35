#pragma once

#include <string>
#include <vector>

#include "xdbn/error.hpp"
#include "xdbn/matrix.hpp"
#include "xdbn/rbm.hpp"
#include "xdbn/rng.hpp"

// Deep-belief autoencoder: a greedy layer-wise stack of RBMs whose final
// hidden layer width equals the input width. Attribution consumes only the
// inter-layer weight matrices; biases are trained but deliberately excluded
// from that list.

namespace xdbn {

struct DbnaModel {
    std::vector<RbmParams> layers;
    std::vector<std::size_t> layer_sizes;  // [n, m1, ..., m_{L-1}, n]

    std::size_t input_width() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
    std::size_t depth() const { return layers.size(); }

    void validate() const {
        if (layers.empty() || layer_sizes.size() != layers.size() + 1)
            throw NumericError("DbnaModel: layer count does not match size list");
        if (layer_sizes.front() != layer_sizes.back())
            throw NumericError("DbnaModel: final layer width " +
                               std::to_string(layer_sizes.back()) + " != input width " +
                               std::to_string(layer_sizes.front()));
        for (std::size_t l = 0; l < layers.size(); ++l) {
            layers[l].validate();
            if (layers[l].n_visible() != layer_sizes[l] || layers[l].n_hidden() != layer_sizes[l + 1])
                throw NumericError("DbnaModel: layer " + std::to_string(l) + " shaped " +
                                   layers[l].weights.shape_str() + ", expected " +
                                   std::to_string(layer_sizes[l]) + "x" +
                                   std::to_string(layer_sizes[l + 1]));
        }
    }
};

struct DbnaTrainConfig {
    std::vector<std::size_t> hidden_sizes;  // excludes the implicit final n
    RbmTrainConfig rbm;

    void validate() const {
        if (hidden_sizes.empty()) throw ConfigError("dbna: hidden_sizes must be non-empty");
        for (std::size_t h : hidden_sizes)
            if (h < 1) throw ConfigError("dbna: hidden sizes must be >= 1");
        rbm.validate();
    }
};

struct DbnaTrainResult {
    DbnaModel model;
    std::vector<std::vector<double>> layer_epoch_errors;  // per layer, per epoch
};

// Layer l trains on the hidden probabilities of layer l-1 (layer 0 on the
// raw data); the stack is returned in input-to-output order.
inline DbnaTrainResult train_dbna(const Matrix& data, const DbnaTrainConfig& config,
                                  RngStream& rng) {
    config.validate();
    if (data.rows() == 0 || data.cols() == 0) throw DataError("train_dbna: empty data");

    std::vector<std::size_t> sizes;
    sizes.push_back(data.cols());
    for (std::size_t h : config.hidden_sizes) sizes.push_back(h);
    sizes.push_back(data.cols());

    DbnaTrainResult result;
    result.model.layer_sizes = sizes;
    Matrix current = data;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        RngStream layer_rng = rng.split(l);
        try {
            RbmTrainResult r = train_rbm(current, sizes[l + 1], config.rbm, layer_rng);
            current = hidden_probabilities(current, r.params);
            result.layer_epoch_errors.push_back(std::move(r.epoch_errors));
            result.model.layers.push_back(std::move(r.params));
        } catch (const DataError& e) {
            throw DataError("dbna layer " + std::to_string(l) + ": " + e.what());
        } catch (const NumericError& e) {
            throw NumericError("dbna layer " + std::to_string(l) + ": " + e.what());
        }
    }
    result.model.validate();
    return result;
}

// Per-layer probability vectors for one input; the last has the input width.
inline std::vector<std::vector<double>> forward_probabilities(const DbnaModel& model,
                                                              const std::vector<double>& x) {
    if (x.size() != model.input_width())
        throw NumericError("forward_probabilities: input length " + std::to_string(x.size()) +
                           " != " + std::to_string(model.input_width()));
    std::vector<std::vector<double>> out;
    out.reserve(model.depth());
    std::vector<double> current = x;
    for (const RbmParams& layer : model.layers) {
        current = hidden_activation(current, layer);
        out.push_back(current);
    }
    return out;
}

// Autoencoder reconstruction error of the full stack (probabilities only).
inline double stack_reconstruction_error(const DbnaModel& model, const Matrix& data) {
    double total = 0.0;
    std::vector<double> x(data.cols());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) x[c] = data(r, c);
        const std::vector<double>& recon = forward_probabilities(model, x).back();
        for (std::size_t c = 0; c < data.cols(); ++c) {
            double d = recon[c] - x[c];
            total += d * d;
        }
    }
    return total / static_cast<double>(data.rows() * data.cols());
}

// The ordered inter-layer weight matrices, biases excluded; value copies.
inline std::vector<Matrix> collect_weights(const DbnaModel& model) {
    model.validate();
    std::vector<Matrix> out;
    out.reserve(model.depth());
    for (const RbmParams& layer : model.layers) out.push_back(layer.weights);
    return out;
}

}  // namespace xdbn
