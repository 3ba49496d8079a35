#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "xdbn/dataset.hpp"
#include "xdbn/error.hpp"
#include "xdbn/numeric.hpp"
#include "xdbn/rng.hpp"

// Planted-ground-truth benchmark generator. The informative features share a
// bimodal latent factor, which gives them joint structure an unsupervised
// encoder has to spend capacity on; the target depends on them linearly plus
// a mild quadratic term. Noise features are independent of everything.

namespace xdbn {

struct SyntheticSpec {
    std::size_t n_samples = 500;
    std::size_t n_informative = 3;
    std::size_t n_noise = 3;
    TaskKind task = TaskKind::Classification;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    Dataset dataset;
    std::vector<bool> informative_mask;  // true for ground-truth relevant columns
};

inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_samples < 2) throw ConfigError("generate_synthetic: need at least 2 samples");
    if (spec.n_informative < 1) throw ConfigError("generate_synthetic: need >= 1 informative");
    const std::size_t d = spec.n_informative + spec.n_noise;

    RngStream rng(spec.seed);
    std::vector<double> loadings(spec.n_informative), effects(spec.n_informative);
    for (std::size_t j = 0; j < spec.n_informative; ++j) {
        loadings[j] = 0.8 + 0.4 * rng.uniform01();
        effects[j] = 0.7 + 0.6 * rng.uniform01();
    }

    SyntheticData out;
    out.dataset.features = Matrix(spec.n_samples, d);
    out.dataset.target.resize(spec.n_samples);
    out.dataset.has_target = true;
    out.dataset.target_name = "target";
    out.informative_mask.assign(d, false);
    for (std::size_t j = 0; j < d; ++j) {
        ColumnSpec c;
        c.name = "f" + std::to_string(j);
        out.dataset.schema.push_back(std::move(c));
        if (j < spec.n_informative) out.informative_mask[j] = true;
    }

    for (std::size_t r = 0; r < spec.n_samples; ++r) {
        double z = rng.bernoulli(0.5) ? 1.0 : -1.0;
        double signal = 0.0;
        for (std::size_t j = 0; j < spec.n_informative; ++j) {
            double x = loadings[j] * z + 0.28 * rng.normal();
            out.dataset.features(r, j) = x;
            signal += effects[j] * x;
        }
        signal += 0.5 * out.dataset.features(r, 0) * out.dataset.features(r, 0);  // mild nonlinearity
        for (std::size_t j = spec.n_informative; j < d; ++j)
            out.dataset.features(r, j) = rng.normal();
        if (spec.task == TaskKind::Classification) {
            out.dataset.target[r] = rng.bernoulli(sigmoid(0.8 * signal - 0.6)) ? 1.0 : 0.0;
        } else {
            out.dataset.target[r] = 0.8 * signal + 0.1 * rng.normal();
        }
    }

    // classification needs both classes; nudge degenerate tiny draws
    if (spec.task == TaskKind::Classification) {
        bool has0 = false, has1 = false;
        for (double y : out.dataset.target) (y == 1.0 ? has1 : has0) = true;
        if (!has0) out.dataset.target[0] = 0.0;
        if (!has1) out.dataset.target[0] = 1.0;
    }
    out.dataset.validate();
    return out;
}

}  // namespace xdbn
