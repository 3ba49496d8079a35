#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "xdbn/error.hpp"
#include "xdbn/matrix.hpp"
#include "xdbn/numeric.hpp"

// Connection-weight feature attribution: the single-hidden-layer Garson
// partitioning and its multi-layer extension built on column-normalized
// absolute weight matrices. All sums that aggregate over features use
// correctly rounded summation so permuting input features permutes the output
// scores bit-exactly.

namespace xdbn {

// Column-stochastic matrix: entries >= 0, every column sums to 1.
struct NormalizedWeightMatrix {
    Matrix matrix;
};

struct RelativeContribution {
    std::vector<double> rc;  // length n, nonnegative, sums to n
};

struct ImportanceVector {
    std::vector<double> scores;       // percent, sums to 100
    std::vector<std::size_t> ranking;  // descending score, ties by ascending index
};

// What to do with a column whose absolute sum is zero (dead hidden unit):
// fail loudly by default, or assign the column uniform mass 1/n.
enum class DeadColumnPolicy { Error, Uniform };

inline std::vector<std::size_t> rank_descending(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });
    return order;
}

inline NormalizedWeightMatrix normalize_columns(const Matrix& w,
                                                DeadColumnPolicy policy = DeadColumnPolicy::Error) {
    if (w.rows() == 0 || w.cols() == 0) throw NumericError("normalize_columns: empty matrix");
    Matrix out(w.rows(), w.cols());
    std::vector<double> col(w.rows());
    for (std::size_t j = 0; j < w.cols(); ++j) {
        for (std::size_t i = 0; i < w.rows(); ++i) col[i] = std::fabs(w(i, j));
        double s = sum_exact(col);
        if (s == 0.0) {
            if (policy == DeadColumnPolicy::Error)
                throw NumericError("normalize_columns: column " + std::to_string(j) +
                                   " has zero absolute sum");
            double u = 1.0 / static_cast<double>(w.rows());
            for (std::size_t i = 0; i < w.rows(); ++i) out(i, j) = u;
        } else {
            for (std::size_t i = 0; i < w.rows(); ++i) out(i, j) = col[i] / s;
        }
    }
    return NormalizedWeightMatrix{std::move(out)};
}

// Left-to-right product of the normalized chain. Column-stochasticity is
// closed under the product, so the result's columns still sum to 1.
inline Matrix cumulative_weights(const std::vector<NormalizedWeightMatrix>& normalized) {
    if (normalized.empty()) throw NumericError("cumulative_weights: empty matrix list");
    const std::size_t n = normalized.front().matrix.rows();
    if (normalized.back().matrix.cols() != n)
        throw NumericError("cumulative_weights: chain does not return to input width (" +
                           std::to_string(n) + " vs " +
                           std::to_string(normalized.back().matrix.cols()) + ")");
    Matrix cw = normalized.front().matrix;
    for (std::size_t l = 1; l < normalized.size(); ++l) {
        if (cw.cols() != normalized[l].matrix.rows())
            throw NumericError("cumulative_weights: shape mismatch between matrices " +
                               std::to_string(l - 1) + " and " + std::to_string(l) + " (" +
                               cw.shape_str() + " * " + normalized[l].matrix.shape_str() + ")");
        cw = matmul(cw, normalized[l].matrix);
    }
    return cw;
}

inline RelativeContribution relative_contribution(const Matrix& cw) {
    if (cw.rows() != cw.cols())
        throw NumericError("relative_contribution: matrix not square (" + cw.shape_str() + ")");
    RelativeContribution out;
    out.rc.resize(cw.rows());
    for (std::size_t i = 0; i < cw.rows(); ++i) out.rc[i] = sum_exact(cw.row(i));
    return out;
}

inline ImportanceVector relative_importance(const RelativeContribution& rc) {
    double total = sum_exact(rc.rc);
    if (total <= 0.0) throw NumericError("relative_importance: contribution sum is zero");
    ImportanceVector out;
    out.scores.resize(rc.rc.size());
    for (std::size_t i = 0; i < rc.rc.size(); ++i) out.scores[i] = 100.0 * rc.rc[i] / total;
    out.ranking = rank_descending(out.scores);
    return out;
}

// Full chain: normalize each layer, multiply, row-sum, convert to percent.
inline ImportanceVector ega(const std::vector<Matrix>& weights,
                            DeadColumnPolicy policy = DeadColumnPolicy::Error) {
    if (weights.empty()) throw NumericError("ega: empty weight list");
    std::vector<NormalizedWeightMatrix> normalized;
    normalized.reserve(weights.size());
    for (const Matrix& w : weights) normalized.push_back(normalize_columns(w, policy));
    return relative_importance(relative_contribution(cumulative_weights(normalized)));
}

// Single-hidden-layer attribution: per hidden unit, share the unit's output
// weight magnitude across inputs in proportion to |w_ij|, then sum over
// hidden units and convert to percent. Multiple output units are summed.
inline ImportanceVector garson(const Matrix& w_ih, const Matrix& w_ho,
                               DeadColumnPolicy policy = DeadColumnPolicy::Error) {
    const std::size_t n = w_ih.rows();
    const std::size_t m = w_ih.cols();
    if (w_ho.rows() != m)
        throw NumericError("garson: hidden widths disagree (" + w_ih.shape_str() + " vs " +
                           w_ho.shape_str() + ")");
    std::vector<double> out_mass(m, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t o = 0; o < w_ho.cols(); ++o) out_mass[j] += std::fabs(w_ho(j, o));

    NormalizedWeightMatrix norm = normalize_columns(w_ih, policy);
    std::vector<double> contrib(n, 0.0);
    std::vector<double> terms(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) terms[j] = norm.matrix(i, j) * out_mass[j];
        contrib[i] = sum_exact(terms);
    }
    double total = sum_exact(contrib);
    if (total <= 0.0) throw NumericError("garson: all output weights are zero");
    ImportanceVector out;
    out.scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.scores[i] = 100.0 * contrib[i] / total;
    out.ranking = rank_descending(out.scores);
    return out;
}

struct TopK {
    std::vector<std::size_t> indices;  // first k of the ranking
    double cumulative_percent;
};

inline TopK top_k(const ImportanceVector& importance, std::size_t k) {
    const std::size_t n = importance.scores.size();
    if (k < 1 || k > n)
        throw NumericError("top_k: k=" + std::to_string(k) + " out of range [1, " +
                           std::to_string(n) + "]");
    TopK out;
    out.indices.assign(importance.ranking.begin(), importance.ranking.begin() + k);
    std::vector<double> kept(k);
    for (std::size_t i = 0; i < k; ++i) kept[i] = importance.scores[out.indices[i]];
    out.cumulative_percent = sum_exact(kept);
    return out;
}

}  // namespace xdbn
