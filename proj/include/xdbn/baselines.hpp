#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "xdbn/attribution.hpp"
#include "xdbn/dataset.hpp"
#include "xdbn/error.hpp"
#include "xdbn/matrix.hpp"
#include "xdbn/numeric.hpp"

// Wald chi-square feature ranking: the per-coefficient squared z-statistic
// from a maximum-likelihood logistic fit (classification) or ordinary least
// squares (regression). This is the comparison baseline for the attribution
// rankings, so the fitting procedure is pinned down exactly: damped Newton
// with a small ridge stabilizer for the logistic model, explicit normal
// equations for OLS, standard errors from the inverse (observed) information.

namespace xdbn {

struct WaldRanking {
    std::vector<double> statistics;    // per feature, finite and nonnegative
    std::vector<std::size_t> ranking;  // descending statistic, ties by index
    std::size_t iterations = 0;
    bool ridge_stabilized = false;     // regression only: XtX needed jitter
};

struct WaldOptions {
    double ridge = 1e-8;          // logistic stabilizer
    double tolerance = 1e-8;      // max |gradient| at convergence
    std::size_t max_iterations = 200;
    bool allow_ridge_fallback = true;  // regression rank-deficiency handling
};

namespace detail {

// design matrix with a leading intercept column
inline Matrix with_intercept(const Matrix& x) {
    Matrix z(x.rows(), x.cols() + 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        z(r, 0) = 1.0;
        for (std::size_t c = 0; c < x.cols(); ++c) z(r, c + 1) = x(r, c);
    }
    return z;
}

}  // namespace detail

inline WaldRanking wald_rank_classification(const Matrix& x, const std::vector<double>& y,
                                            const WaldOptions& opts = {}) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols() + 1;
    if (y.size() != n) throw DataError("wald_rank_classification: label length mismatch");
    std::size_t pos = 0;
    for (double v : y) {
        if (v != 0.0 && v != 1.0) throw DataError("wald_rank_classification: labels must be 0/1");
        pos += (v == 1.0);
    }
    if (pos == 0 || pos == n) throw DataError("wald_rank_classification: a class is absent");

    Matrix z = detail::with_intercept(x);
    std::vector<double> beta(p, 0.0);
    std::vector<double> eta(n, 0.0), prob(n, 0.5);

    auto log_likelihood = [&](const std::vector<double>& b) {
        double ll = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double e = 0.0;
            const double* row = z.row_ptr(r);
            for (std::size_t c = 0; c < p; ++c) e += row[c] * b[c];
            // stable log(1 + exp(e))
            double softplus = e > 30.0 ? e : std::log1p(std::exp(e));
            ll += y[r] * e - softplus;
        }
        double penalty = 0.0;
        for (std::size_t c = 0; c < p; ++c) penalty += b[c] * b[c];
        return ll - 0.5 * opts.ridge * penalty;
    };

    double ll = log_likelihood(beta);
    std::size_t iter = 0;
    double gnorm = 0.0;
    Matrix hessian(p, p);
    for (; iter < opts.max_iterations; ++iter) {
        for (std::size_t r = 0; r < n; ++r) {
            double e = 0.0;
            const double* row = z.row_ptr(r);
            for (std::size_t c = 0; c < p; ++c) e += row[c] * beta[c];
            eta[r] = e;
            prob[r] = sigmoid(e);
        }
        std::vector<double> grad(p, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            double resid = y[r] - prob[r];
            const double* row = z.row_ptr(r);
            for (std::size_t c = 0; c < p; ++c) grad[c] += resid * row[c];
        }
        for (std::size_t c = 0; c < p; ++c) grad[c] -= opts.ridge * beta[c];
        gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::fabs(g));
        if (gnorm < opts.tolerance) break;

        hessian = Matrix(p, p);
        for (std::size_t r = 0; r < n; ++r) {
            double s = prob[r] * (1.0 - prob[r]);
            const double* row = z.row_ptr(r);
            for (std::size_t a = 0; a < p; ++a) {
                double sa = s * row[a];
                double* hrow = hessian.row_ptr(a);
                for (std::size_t b = a; b < p; ++b) hrow[b] += sa * row[b];
            }
        }
        for (std::size_t a = 0; a < p; ++a) {
            hessian(a, a) += opts.ridge;
            for (std::size_t b = a + 1; b < p; ++b) hessian(b, a) = hessian(a, b);
        }
        std::vector<double> step = solve_spd(hessian, grad, 1e-12);

        // damping: halve until the penalized likelihood does not decrease
        double scale = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 30; ++halvings) {
            std::vector<double> cand = beta;
            for (std::size_t c = 0; c < p; ++c) cand[c] += scale * step[c];
            double cand_ll = log_likelihood(cand);
            if (cand_ll >= ll - 1e-12) {
                beta = std::move(cand);
                ll = cand_ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;  // no ascent direction left; gradient check below decides
    }

    // perfect separation: every sample confidently correct. The ridge keeps
    // the penalized optimum finite, so this can pass the gradient check while
    // the statistics are meaningless; report it either way.
    bool separated = true;
    for (std::size_t r = 0; r < n && separated; ++r)
        separated = std::fabs(y[r] - prob[r]) < 1e-4;
    if (separated)
        throw NumericError(
            "wald_rank_classification: perfect separation detected; Wald statistics are not "
            "identifiable");
    if (gnorm >= opts.tolerance)
        throw NumericError("wald_rank_classification: Newton did not converge in " +
                           std::to_string(opts.max_iterations) +
                           " iterations (max |gradient| = " + std::to_string(gnorm) + ")");

    // observed information at the optimum
    hessian = Matrix(p, p);
    for (std::size_t r = 0; r < n; ++r) {
        double s = prob[r] * (1.0 - prob[r]);
        const double* row = z.row_ptr(r);
        for (std::size_t a = 0; a < p; ++a) {
            double sa = s * row[a];
            double* hrow = hessian.row_ptr(a);
            for (std::size_t b = a; b < p; ++b) hrow[b] += sa * row[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a) {
        hessian(a, a) += opts.ridge;
        for (std::size_t b = a + 1; b < p; ++b) hessian(b, a) = hessian(a, b);
    }
    std::vector<double> inv_diag = spd_inverse_diagonal(hessian, 1e-12);

    WaldRanking out;
    out.iterations = iter;
    out.statistics.resize(x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double se2 = inv_diag[j + 1];
        if (se2 <= 0.0) throw NumericError("wald_rank_classification: non-positive variance");
        out.statistics[j] = beta[j + 1] * beta[j + 1] / se2;
    }
    out.ranking = rank_descending(out.statistics);
    return out;
}

inline WaldRanking wald_rank_regression(const Matrix& x, const std::vector<double>& y,
                                        const WaldOptions& opts = {}) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols() + 1;
    if (y.size() != n) throw DataError("wald_rank_regression: target length mismatch");
    if (n <= p)
        throw DataError("wald_rank_regression: needs n_samples > n_features (+ intercept), got " +
                        std::to_string(n) + " vs " + std::to_string(p));

    Matrix z = detail::with_intercept(x);
    Matrix xtx(p, p);
    std::vector<double> xty(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = z.row_ptr(r);
        for (std::size_t a = 0; a < p; ++a) {
            xty[a] += row[a] * y[r];
            double* hrow = xtx.row_ptr(a);
            for (std::size_t b = a; b < p; ++b) hrow[b] += row[a] * row[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b) xtx(b, a) = xtx(a, b);

    WaldRanking out;
    std::vector<double> beta;
    double jitter = 0.0;
    try {
        beta = solve_spd(xtx, xty, 0.0, /*allow_jitter=*/false);
    } catch (const NumericError&) {
        if (!opts.allow_ridge_fallback)
            throw NumericError("wald_rank_regression: X'X is rank deficient");
        double scale = 0.0;
        for (std::size_t a = 0; a < p; ++a) scale = std::max(scale, xtx(a, a));
        jitter = std::max(scale, 1.0) * 1e-10;
        beta = solve_spd(xtx, xty, jitter);
        out.ridge_stabilized = true;
    }

    double rss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double pred = 0.0;
        const double* row = z.row_ptr(r);
        for (std::size_t c = 0; c < p; ++c) pred += row[c] * beta[c];
        double d = y[r] - pred;
        rss += d * d;
    }
    double sigma2 = rss / static_cast<double>(n - p);
    double y_scale = 0.0;
    for (double v : y) y_scale = std::max(y_scale, std::fabs(v));
    if (sigma2 <= 1e-24 * std::max(1.0, y_scale * y_scale))
        throw NumericError("wald_rank_regression: zero residual variance or zero coefficients");

    std::vector<double> inv_diag = spd_inverse_diagonal(xtx, jitter);
    out.statistics.resize(x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double se2 = sigma2 * inv_diag[j + 1];
        if (se2 <= 0.0) throw NumericError("wald_rank_regression: non-positive variance");
        out.statistics[j] = beta[j + 1] * beta[j + 1] / se2;
    }
    out.ranking = rank_descending(out.statistics);
    return out;
}

inline WaldRanking wald_rank(const Matrix& x, const std::vector<double>& y, TaskKind task,
                             const WaldOptions& opts = {}) {
    return task == TaskKind::Classification ? wald_rank_classification(x, y, opts)
                                            : wald_rank_regression(x, y, opts);
}

}  // namespace xdbn
