#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "xdbn/error.hpp"

namespace xdbn {

// Logistic function clamped to the open interval (0, 1). The upper clamp is
// one ulp below 1 so saturated activations stay valid Bernoulli parameters.
inline double sigmoid(double x) {
    constexpr double lo = 1e-300;
    constexpr double hi = 1.0 - 1.1102230246251565e-16;  // 1 - 2^-53
    double p = 1.0 / (1.0 + std::exp(-x));
    if (p < lo) return lo;
    if (p > hi) return hi;
    return p;
}

// Correctly rounded sum of doubles (Shewchuk partials, CPython lsum rounding).
// The result equals the exact real sum rounded once, so it is independent of
// the order of the addends. Used where permutation invariance must be exact.
inline double sum_exact(std::span<const double> xs) {
    std::vector<double> partials;
    partials.reserve(8);
    for (double x : xs) {
        std::size_t used = 0;
        for (std::size_t j = 0; j < partials.size(); ++j) {
            double y = partials[j];
            if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
            double hi = x + y;
            double lo = y - (hi - x);
            if (lo != 0.0) partials[used++] = lo;
            x = hi;
        }
        partials.resize(used);
        partials.push_back(x);
    }
    // Round the non-overlapping expansion, with the half-even correction.
    double hi = 0.0;
    std::size_t n = partials.size();
    if (n > 0) {
        double lo = 0.0;
        hi = partials[--n];
        while (n > 0) {
            double x = hi;
            double y = partials[--n];
            hi = x + y;
            double yr = hi - x;
            lo = y - yr;
            if (lo != 0.0) break;
        }
        if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) ||
                      (lo > 0.0 && partials[n - 1] > 0.0))) {
            double y2 = lo * 2.0;
            double x2 = hi + y2;
            if (y2 == x2 - hi) hi = x2;
        }
    }
    return hi;
}

inline double sum_exact(const std::vector<double>& xs) {
    return sum_exact(std::span<const double>(xs.data(), xs.size()));
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw NumericError("mean of empty vector");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double mean(const std::vector<double>& xs) {
    return mean(std::span<const double>(xs.data(), xs.size()));
}

// Sample standard deviation, divisor n-1.
inline double sample_std(std::span<const double> xs) {
    if (xs.size() < 2) throw NumericError("sample_std needs at least 2 values");
    double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) {
        double d = x - m;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double sample_std(const std::vector<double>& xs) {
    return sample_std(std::span<const double>(xs.data(), xs.size()));
}

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace xdbn
