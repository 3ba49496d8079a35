#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "xdbn/error.hpp"
#include "xdbn/matrix.hpp"
#include "xdbn/numeric.hpp"
#include "xdbn/rng.hpp"

// Bernoulli-Bernoulli restricted Boltzmann machine trained by CD-k. Visible
// inputs are expected in [0,1] and are treated as probabilities in the
// positive phase; the reconstruction chain uses sampled binary states and the
// final hidden phase uses probabilities.

namespace xdbn {

struct RbmParams {
    Matrix weights;  // n_visible x n_hidden
    std::vector<double> visible_bias;
    std::vector<double> hidden_bias;

    std::size_t n_visible() const { return weights.rows(); }
    std::size_t n_hidden() const { return weights.cols(); }

    void validate() const {
        if (visible_bias.size() != n_visible() || hidden_bias.size() != n_hidden())
            throw NumericError("RbmParams: bias lengths do not match weight shape " +
                               weights.shape_str());
        weights.require_finite("rbm weights");
        if (!all_finite(visible_bias) || !all_finite(hidden_bias))
            throw NumericError("RbmParams: non-finite bias");
    }
};

struct RbmTrainConfig {
    double learning_rate = 0.2;
    std::size_t epochs = 100;
    std::size_t cd_steps = 1;
    std::size_t batch_size = 32;
    double init_weight_scale = 0.01;

    void validate() const {
        if (!(learning_rate >= 0.0)) throw ConfigError("rbm: learning_rate must be >= 0");
        if (epochs < 1) throw ConfigError("rbm: epochs must be >= 1");
        if (cd_steps < 1) throw ConfigError("rbm: cd_steps must be >= 1");
        if (batch_size < 1) throw ConfigError("rbm: batch_size must be >= 1");
    }
};

inline std::vector<double> hidden_activation(std::span<const double> v, const RbmParams& params) {
    if (v.size() != params.n_visible())
        throw NumericError("hidden_activation: input length " + std::to_string(v.size()) +
                           " != n_visible " + std::to_string(params.n_visible()));
    std::vector<double> p(params.n_hidden());
    for (std::size_t j = 0; j < params.n_hidden(); ++j) p[j] = params.hidden_bias[j];
    for (std::size_t i = 0; i < params.n_visible(); ++i) {
        double vi = v[i];
        if (vi == 0.0) continue;
        const double* wrow = params.weights.row_ptr(i);
        for (std::size_t j = 0; j < params.n_hidden(); ++j) p[j] += vi * wrow[j];
    }
    for (double& x : p) x = sigmoid(x);
    return p;
}

inline std::vector<double> hidden_activation(const std::vector<double>& v, const RbmParams& params) {
    return hidden_activation(std::span<const double>(v.data(), v.size()), params);
}

inline std::vector<double> visible_activation(std::span<const double> h, const RbmParams& params) {
    if (h.size() != params.n_hidden())
        throw NumericError("visible_activation: input length " + std::to_string(h.size()) +
                           " != n_hidden " + std::to_string(params.n_hidden()));
    std::vector<double> p(params.n_visible());
    for (std::size_t i = 0; i < params.n_visible(); ++i) {
        double s = params.visible_bias[i];
        const double* wrow = params.weights.row_ptr(i);
        for (std::size_t j = 0; j < params.n_hidden(); ++j) s += h[j] * wrow[j];
        p[i] = sigmoid(s);
    }
    return p;
}

inline std::vector<double> visible_activation(const std::vector<double>& h, const RbmParams& params) {
    return visible_activation(std::span<const double>(h.data(), h.size()), params);
}

// Batched hidden probabilities: one row per input row.
inline Matrix hidden_probabilities(const Matrix& batch, const RbmParams& params) {
    if (batch.cols() != params.n_visible())
        throw NumericError("hidden_probabilities: batch width " + std::to_string(batch.cols()) +
                           " != n_visible " + std::to_string(params.n_visible()));
    Matrix p = matmul(batch, params.weights);
    for (std::size_t r = 0; r < p.rows(); ++r) {
        double* row = p.row_ptr(r);
        for (std::size_t j = 0; j < p.cols(); ++j) row[j] = sigmoid(row[j] + params.hidden_bias[j]);
    }
    return p;
}

inline std::vector<double> sample_bernoulli(const std::vector<double>& p, RngStream& rng) {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0 || p[i] > 1.0)
            throw NumericError("sample_bernoulli: probability out of [0,1]");
        out[i] = rng.bernoulli(p[i]) ? 1.0 : 0.0;
    }
    return out;
}

// Both phases of one CD-k estimate, already divided by the batch size. The
// update direction is pos_* minus neg_*.
struct CdGradient {
    Matrix pos_weight, neg_weight;
    std::vector<double> pos_visible, neg_visible;
    std::vector<double> pos_hidden, neg_hidden;
};

namespace detail {

inline std::uint64_t hash_row(std::span<const double> row) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (double v : row) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xFF;
            h *= 0x100000001B3ull;
        }
    }
    return h;
}

}  // namespace detail

// One CD-k gradient estimate for a batch. Consumes exactly one draw from the
// caller's stream per call; each row's Gibbs chain runs on a child stream
// keyed by (call key, row content hash, duplicate index), which makes the
// estimate invariant to the row order of the batch. Within a row the draw
// order is: sample h0 (n_hidden draws), then per Gibbs step sample v
// (n_visible draws) and, on all but the final step, sample h (n_hidden
// draws); the final hidden phase uses probabilities.
inline CdGradient cd_k_gradient(const Matrix& batch, const RbmParams& params, std::size_t k,
                                RngStream& rng) {
    params.validate();
    const std::size_t nv = params.n_visible();
    const std::size_t nh = params.n_hidden();
    if (batch.cols() != nv)
        throw NumericError("cd_k_gradient: batch width " + std::to_string(batch.cols()) +
                           " != n_visible " + std::to_string(nv));
    if (batch.rows() == 0) throw DataError("cd_k_gradient: empty batch");

    const std::uint64_t call_key = rng.next_u64();
    CdGradient g;
    g.pos_weight = Matrix(nv, nh);
    g.neg_weight = Matrix(nv, nh);
    g.pos_visible.assign(nv, 0.0);
    g.neg_visible.assign(nv, 0.0);
    g.pos_hidden.assign(nh, 0.0);
    g.neg_hidden.assign(nh, 0.0);

    std::map<std::uint64_t, std::size_t> seen;
    std::vector<double> v0(nv);
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        for (std::size_t i = 0; i < nv; ++i) {
            v0[i] = batch(r, i);
            if (v0[i] < 0.0 || v0[i] > 1.0)
                throw DataError("cd_k_gradient: visible value outside [0,1]");
        }
        std::uint64_t row_hash = detail::hash_row(batch.row(r));
        std::size_t dup = seen[row_hash]++;
        RngStream chain(detail::mix3(call_key, row_hash, dup));

        std::vector<double> ph0 = hidden_activation(v0, params);
        std::vector<double> h = sample_bernoulli(ph0, chain);
        std::vector<double> v;
        std::vector<double> ph = ph0;
        for (std::size_t step = 0; step < k; ++step) {
            v = sample_bernoulli(visible_activation(h, params), chain);
            ph = hidden_activation(v, params);
            if (step + 1 < k) h = sample_bernoulli(ph, chain);
        }
        for (std::size_t i = 0; i < nv; ++i) {
            if (v0[i] != 0.0) {
                double* row = g.pos_weight.row_ptr(i);
                for (std::size_t j = 0; j < nh; ++j) row[j] += v0[i] * ph0[j];
            }
            if (v[i] != 0.0) {
                double* row = g.neg_weight.row_ptr(i);
                for (std::size_t j = 0; j < nh; ++j) row[j] += v[i] * ph[j];
            }
            g.pos_visible[i] += v0[i];
            g.neg_visible[i] += v[i];
        }
        for (std::size_t j = 0; j < nh; ++j) {
            g.pos_hidden[j] += ph0[j];
            g.neg_hidden[j] += ph[j];
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.rows());
    for (auto& x : g.pos_weight.data()) x *= inv;
    for (auto& x : g.neg_weight.data()) x *= inv;
    for (auto& x : g.pos_visible) x *= inv;
    for (auto& x : g.neg_visible) x *= inv;
    for (auto& x : g.pos_hidden) x *= inv;
    for (auto& x : g.neg_hidden) x *= inv;
    return g;
}

inline RbmParams cd_k_step(const Matrix& batch, const RbmParams& params,
                           const RbmTrainConfig& config, RngStream& rng) {
    config.validate();
    CdGradient g = cd_k_gradient(batch, params, config.cd_steps, rng);
    RbmParams out = params;
    const double lr = config.learning_rate;
    for (std::size_t i = 0; i < params.n_visible(); ++i) {
        double* wrow = out.weights.row_ptr(i);
        const double* prow = g.pos_weight.row_ptr(i);
        const double* nrow = g.neg_weight.row_ptr(i);
        for (std::size_t j = 0; j < params.n_hidden(); ++j) wrow[j] += lr * (prow[j] - nrow[j]);
        out.visible_bias[i] += lr * (g.pos_visible[i] - g.neg_visible[i]);
    }
    for (std::size_t j = 0; j < params.n_hidden(); ++j)
        out.hidden_bias[j] += lr * (g.pos_hidden[j] - g.neg_hidden[j]);
    out.weights.require_finite("cd_k_step");
    return out;
}

// Deterministic reconstruction error: probabilities up and back down, no
// sampling; mean squared error over all entries.
inline double reconstruction_error(const Matrix& data, const RbmParams& params) {
    double total = 0.0;
    std::vector<double> v(data.cols());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t i = 0; i < data.cols(); ++i) v[i] = data(r, i);
        std::vector<double> back = visible_activation(hidden_activation(v, params), params);
        for (std::size_t i = 0; i < data.cols(); ++i) {
            double d = back[i] - v[i];
            total += d * d;
        }
    }
    return total / static_cast<double>(data.rows() * data.cols());
}

struct RbmTrainResult {
    RbmParams params;
    std::vector<double> epoch_errors;  // one deterministic value per epoch
};

// Weight init is uniform(-init_weight_scale, +init_weight_scale) drawn in
// row-major order; biases start at zero. Per epoch the row order is shuffled
// unless batch_size covers the whole set, in which case training is order
// independent up to floating-point accumulation.
inline RbmTrainResult train_rbm(const Matrix& data, std::size_t n_hidden,
                                const RbmTrainConfig& config, RngStream& rng) {
    config.validate();
    if (data.rows() == 0 || data.cols() == 0) throw DataError("train_rbm: empty data");
    for (double v : data.data())
        if (v < 0.0 || v > 1.0) throw DataError("train_rbm: data outside [0,1]");

    RbmParams params;
    params.weights = Matrix(data.cols(), n_hidden);
    for (auto& w : params.weights.data())
        w = rng.uniform(-config.init_weight_scale, config.init_weight_scale);
    params.visible_bias.assign(data.cols(), 0.0);
    params.hidden_bias.assign(n_hidden, 0.0);

    const std::size_t n = data.rows();
    const std::size_t bs = std::min(config.batch_size, n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    RbmTrainResult result;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (bs < n) rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += bs) {
            std::size_t stop = std::min(start + bs, n);
            Matrix batch(stop - start, data.cols());
            for (std::size_t r = start; r < stop; ++r)
                for (std::size_t c = 0; c < data.cols(); ++c)
                    batch(r - start, c) = data(order[r], c);
            params = cd_k_step(batch, params, config, rng);
        }
        result.epoch_errors.push_back(reconstruction_error(data, params));
    }
    result.params = std::move(params);
    return result;
}

}  // namespace xdbn
