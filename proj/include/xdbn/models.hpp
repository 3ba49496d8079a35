#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "xdbn/dataset.hpp"
#include "xdbn/error.hpp"
#include "xdbn/matrix.hpp"
#include "xdbn/numeric.hpp"
#include "xdbn/rng.hpp"

// Downstream models used to score feature subsets: L2 logistic regression,
// CART, the linear family (OLS / ridge / lasso), linear epsilon-insensitive
// SVR, and a one-hidden-layer MLP. Every fitter is deterministic given
// (data, config, seed). Classification predictions are positive-class
// probabilities in [0,1]; regression predictions are raw reals.

namespace xdbn {

enum class ModelKind { Logistic, Tree, Linear, Ridge, Lasso, Svr, Mlp };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::Logistic: return "logistic";
        case ModelKind::Tree: return "tree";
        case ModelKind::Linear: return "linear";
        case ModelKind::Ridge: return "ridge";
        case ModelKind::Lasso: return "lasso";
        case ModelKind::Svr: return "svr";
        case ModelKind::Mlp: return "mlp";
    }
    return "?";
}

inline ModelKind model_kind_from_name(const std::string& s) {
    for (ModelKind k : {ModelKind::Logistic, ModelKind::Tree, ModelKind::Linear, ModelKind::Ridge,
                        ModelKind::Lasso, ModelKind::Svr, ModelKind::Mlp})
        if (s == model_kind_name(k)) return k;
    throw ConfigError("unknown model kind '" + s + "'");
}

struct ModelConfig {
    ModelKind kind = ModelKind::Logistic;
    double logistic_l2 = 1.0;
    std::size_t tree_max_depth = 8;
    std::size_t tree_min_leaf = 5;
    double linear_lambda = 1.0;   // ridge / lasso penalty
    double svr_c = 1.0;
    double svr_epsilon = 0.1;
    std::size_t mlp_hidden = 0;   // 0 = max(4, n_features / 2)
    double mlp_lr = 0.01;
    std::size_t mlp_epochs = 500;
    std::size_t mlp_batch = 32;
};

struct TrainingMeta {
    std::size_t iterations = 0;
    bool converged = true;
    std::uint64_t seed = 0;
};

struct LogisticModel {
    std::vector<double> beta;  // [intercept, coefficients...]
};

struct TreeModel {
    struct Node {
        bool leaf = true;
        std::size_t feature = 0;
        double threshold = 0.0;
        std::size_t left = 0, right = 0;
        double value = 0.0;  // class-1 probability or mean target
    };
    std::vector<Node> nodes;  // node 0 is the root
};

struct LinearModel {
    std::vector<double> coef;
    double intercept = 0.0;
};

struct SvrModel {
    std::vector<double> w;
    double b = 0.0;
};

struct MlpModel {
    Matrix w1;                // d x h
    std::vector<double> b1;   // h
    std::vector<double> w2;   // h
    double b2 = 0.0;
    bool classification = false;
};

struct FittedModel {
    ModelKind kind = ModelKind::Logistic;
    std::size_t n_features = 0;
    TrainingMeta meta;
    std::variant<LogisticModel, TreeModel, LinearModel, SvrModel, MlpModel> params;
};

// ---------------------------------------------------------------------------
// logistic regression (damped Newton, mean log-loss + (l2/2)|beta|^2,
// intercept unpenalized)

inline FittedModel fit_logistic(const Matrix& x, const std::vector<double>& y, double l2) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols() + 1;
    if (y.size() != n) throw DataError("fit_logistic: label length mismatch");
    std::size_t pos = 0;
    for (double v : y) {
        if (v != 0.0 && v != 1.0) throw DataError("fit_logistic: labels must be 0/1");
        pos += (v == 1.0);
    }
    if (pos == 0 || pos == n) throw DataError("fit_logistic: a class is absent");

    std::vector<double> beta(p, 0.0);
    auto objective = [&](const std::vector<double>& b) {
        double loss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double e = b[0];
            for (std::size_t c = 0; c < x.cols(); ++c) e += x(r, c) * b[c + 1];
            double softplus = e > 30.0 ? e : std::log1p(std::exp(e));
            loss += softplus - y[r] * e;
        }
        loss /= static_cast<double>(n);
        double pen = 0.0;
        for (std::size_t c = 1; c < p; ++c) pen += b[c] * b[c];
        return loss + 0.5 * l2 * pen;
    };

    double obj = objective(beta);
    std::vector<double> prob(n, 0.5);
    std::size_t iter = 0;
    double gnorm = std::numeric_limits<double>::infinity();
    for (; iter < 200; ++iter) {
        for (std::size_t r = 0; r < n; ++r) {
            double e = beta[0];
            for (std::size_t c = 0; c < x.cols(); ++c) e += x(r, c) * beta[c + 1];
            prob[r] = sigmoid(e);
        }
        std::vector<double> grad(p, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            double resid = prob[r] - y[r];
            grad[0] += resid;
            for (std::size_t c = 0; c < x.cols(); ++c) grad[c + 1] += resid * x(r, c);
        }
        for (double& g : grad) g /= static_cast<double>(n);
        for (std::size_t c = 1; c < p; ++c) grad[c] += l2 * beta[c];
        gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::fabs(g));
        if (gnorm < 1e-6) break;

        Matrix h(p, p);
        for (std::size_t r = 0; r < n; ++r) {
            double s = prob[r] * (1.0 - prob[r]) / static_cast<double>(n);
            std::vector<double> row(p);
            row[0] = 1.0;
            for (std::size_t c = 0; c < x.cols(); ++c) row[c + 1] = x(r, c);
            for (std::size_t a = 0; a < p; ++a) {
                double sa = s * row[a];
                for (std::size_t b = a; b < p; ++b) h(a, b) += sa * row[b];
            }
        }
        for (std::size_t a = 0; a < p; ++a) {
            if (a >= 1) h(a, a) += l2;
            h(a, a) += 1e-10;
            for (std::size_t b = a + 1; b < p; ++b) h(b, a) = h(a, b);
        }
        std::vector<double> step = solve_spd(h, grad, 1e-12);
        double scale = 1.0;
        bool moved = false;
        for (int halvings = 0; halvings < 30; ++halvings) {
            std::vector<double> cand = beta;
            for (std::size_t c = 0; c < p; ++c) cand[c] -= scale * step[c];
            double cand_obj = objective(cand);
            if (cand_obj <= obj + 1e-15) {
                beta = std::move(cand);
                obj = cand_obj;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!moved) break;
    }

    FittedModel out;
    out.kind = ModelKind::Logistic;
    out.n_features = x.cols();
    out.meta.iterations = iter;
    out.meta.converged = gnorm < 1e-6;
    out.params = LogisticModel{std::move(beta)};
    return out;
}

// ---------------------------------------------------------------------------
// CART (Gini for classification, variance for regression)

namespace detail {

struct TreeBuilder {
    const Matrix& x;
    const std::vector<double>& y;
    bool classification;
    std::size_t max_depth, min_leaf;
    TreeModel model;

    double impurity(double sum, double sum_sq, double count) const {
        if (count <= 0.0) return 0.0;
        double m = sum / count;
        if (classification) return 2.0 * m * (1.0 - m);  // Gini for binary labels
        return sum_sq / count - m * m;                   // variance
    }

    std::size_t build(std::vector<std::size_t>& rows, std::size_t depth) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t r : rows) {
            sum += y[r];
            sum_sq += y[r] * y[r];
        }
        const double count = static_cast<double>(rows.size());
        const double node_impurity = impurity(sum, sum_sq, count);

        TreeModel::Node node;
        node.value = sum / count;
        std::size_t idx = model.nodes.size();
        model.nodes.push_back(node);
        if (depth >= max_depth || rows.size() < 2 * min_leaf || node_impurity <= 1e-15)
            return idx;

        // best split: maximum impurity decrease; ties go to the lowest
        // feature index, then the lowest threshold (scan order guarantees
        // it). Zero-gain splits are allowed on impure nodes so parity-style
        // targets can still be separated deeper down.
        double best_gain = -1.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;
        std::vector<std::pair<double, double>> vals(rows.size());  // (x, y)
        for (std::size_t f = 0; f < x.cols(); ++f) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                vals[i] = {x(rows[i], f), y[rows[i]]};
            std::sort(vals.begin(), vals.end());
            double lsum = 0.0, lsq = 0.0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                lsum += vals[i].second;
                lsq += vals[i].second * vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                std::size_t nl = i + 1, nr = vals.size() - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                double gain = node_impurity -
                              (static_cast<double>(nl) * impurity(lsum, lsq, static_cast<double>(nl)) +
                               static_cast<double>(nr) * impurity(sum - lsum, sum_sq - lsq,
                                                                  static_cast<double>(nr))) /
                                  count;
                if (gain > best_gain + 1e-15) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                    found = true;
                }
            }
        }
        if (!found) return idx;

        std::vector<std::size_t> left, right;
        for (std::size_t r : rows)
            (x(r, best_feature) <= best_threshold ? left : right).push_back(r);
        model.nodes[idx].leaf = false;
        model.nodes[idx].feature = best_feature;
        model.nodes[idx].threshold = best_threshold;
        std::size_t l = build(left, depth + 1);
        model.nodes[idx].left = l;
        std::size_t r = build(right, depth + 1);
        model.nodes[idx].right = r;
        return idx;
    }
};

}  // namespace detail

inline FittedModel fit_tree(const Matrix& x, const std::vector<double>& y, bool classification,
                            std::size_t max_depth = 8, std::size_t min_leaf = 5) {
    if (y.size() != x.rows()) throw DataError("fit_tree: target length mismatch");
    if (x.rows() < 2 * min_leaf && x.rows() < 1) throw DataError("fit_tree: empty data");
    if (classification)
        for (double v : y)
            if (v != 0.0 && v != 1.0) throw DataError("fit_tree: labels must be 0/1");

    detail::TreeBuilder builder{x, y, classification, max_depth, min_leaf, {}};
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    builder.build(rows, 0);

    FittedModel out;
    out.kind = ModelKind::Tree;
    out.n_features = x.cols();
    out.params = std::move(builder.model);
    return out;
}

// ---------------------------------------------------------------------------
// linear family

// linear: OLS via normal equations (tiny jitter on singularity)
// ridge:  (Xc'Xc + lambda I)^-1 Xc'yc on centered data, intercept unpenalized
// lasso:  cyclic coordinate descent on internally standardized columns,
//         objective (1/2n)|y - b - X beta|^2 + lambda |beta|_1,
//         tolerance 1e-7 on the largest coefficient change, cap 10000 sweeps
inline FittedModel fit_linear_family(const Matrix& x, const std::vector<double>& y, ModelKind kind,
                                     double lambda = 0.0) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n) throw DataError("fit_linear_family: target length mismatch");
    if (n < 2) throw DataError("fit_linear_family: needs at least 2 samples");
    if (lambda < 0.0) throw ConfigError("fit_linear_family: lambda must be >= 0");

    FittedModel out;
    out.kind = kind;
    out.n_features = d;
    LinearModel lm;
    lm.coef.assign(d, 0.0);

    double y_mean = mean(y);
    std::vector<double> x_mean(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t r = 0; r < n; ++r) x_mean[c] += x(r, c);
        x_mean[c] /= static_cast<double>(n);
    }

    if (kind == ModelKind::Linear || kind == ModelKind::Ridge) {
        double lam = kind == ModelKind::Linear ? 0.0 : lambda;
        Matrix a(d, d);
        std::vector<double> b(d, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t i = 0; i < d; ++i) {
                double xi = x(r, i) - x_mean[i];
                b[i] += xi * (y[r] - y_mean);
                for (std::size_t j = i; j < d; ++j) a(i, j) += xi * (x(r, j) - x_mean[j]);
            }
        for (std::size_t i = 0; i < d; ++i) {
            a(i, i) += lam;
            for (std::size_t j = i + 1; j < d; ++j) a(j, i) = a(i, j);
        }
        lm.coef = solve_spd(a, b, d ? a(0, 0) * 1e-14 : 0.0);
        lm.intercept = y_mean;
        for (std::size_t c = 0; c < d; ++c) lm.intercept -= lm.coef[c] * x_mean[c];
        out.params = std::move(lm);
        return out;
    }

    if (kind != ModelKind::Lasso) throw ConfigError("fit_linear_family: not a linear-family kind");

    // standardize columns; zero-variance columns stay at coefficient 0
    std::vector<double> x_std(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double dlt = x(r, c) - x_mean[c];
            ss += dlt * dlt;
        }
        x_std[c] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    }
    Matrix xs(n, d);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t r = 0; r < n; ++r)
            xs(r, c) = x_std[c] > 0.0 ? (x(r, c) - x_mean[c]) / x_std[c] : 0.0;

    std::vector<double> col_sq(d, 0.0);  // (1/n) sum x~^2
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t r = 0; r < n; ++r) col_sq[c] += xs(r, c) * xs(r, c);
        col_sq[c] /= static_cast<double>(n);
    }

    std::vector<double> beta(d, 0.0);
    std::vector<double> resid(n);
    for (std::size_t r = 0; r < n; ++r) resid[r] = y[r] - y_mean;

    auto soft = [](double v, double t) {
        if (v > t) return v - t;
        if (v < -t) return v + t;
        return 0.0;
    };
    std::size_t sweep = 0;
    bool converged = false;
    for (; sweep < 10000; ++sweep) {
        double max_change = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            if (col_sq[c] <= 0.0) continue;
            double rho = 0.0;
            for (std::size_t r = 0; r < n; ++r) rho += xs(r, c) * resid[r];
            rho = rho / static_cast<double>(n) + col_sq[c] * beta[c];
            double next = soft(rho, lambda) / col_sq[c];
            double change = next - beta[c];
            if (change != 0.0) {
                for (std::size_t r = 0; r < n; ++r) resid[r] -= change * xs(r, c);
                beta[c] = next;
                max_change = std::max(max_change, std::fabs(change));
            }
        }
        if (max_change < 1e-7) {
            converged = true;
            break;
        }
    }

    for (std::size_t c = 0; c < d; ++c)
        lm.coef[c] = x_std[c] > 0.0 ? beta[c] / x_std[c] : 0.0;
    lm.intercept = y_mean;
    for (std::size_t c = 0; c < d; ++c) lm.intercept -= lm.coef[c] * x_mean[c];
    out.meta.iterations = sweep;
    out.meta.converged = converged;  // flagged, not fatal
    out.params = std::move(lm);
    return out;
}

// ---------------------------------------------------------------------------
// linear epsilon-insensitive SVR by deterministic subgradient descent

// Minimizes 0.5 |w|^2 + c * sum_i max(0, |y_i - w.x_i - b| - epsilon) with a
// fixed step schedule over 2000 full-batch epochs and tail averaging. Inputs
// are expected on a standardized scale.
inline FittedModel fit_svr(const Matrix& x, const std::vector<double>& y, double c,
                           double epsilon) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n) throw DataError("fit_svr: target length mismatch");
    if (!(c > 0.0)) throw ConfigError("fit_svr: c must be > 0");
    if (epsilon < 0.0) throw ConfigError("fit_svr: epsilon must be >= 0");

    std::vector<double> w(d, 0.0);
    double b = mean(y);
    std::vector<double> w_avg(d, 0.0);
    double b_avg = 0.0;
    const std::size_t epochs = 2000;
    const std::size_t tail = epochs / 4;
    const double eta0 = 0.5 / (c * static_cast<double>(n) + 1.0);

    for (std::size_t t = 0; t < epochs; ++t) {
        std::vector<double> grad(d);
        for (std::size_t j = 0; j < d; ++j) grad[j] = w[j];
        double grad_b = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double pred = b;
            for (std::size_t j = 0; j < d; ++j) pred += w[j] * x(r, j);
            double resid = y[r] - pred;
            if (std::fabs(resid) <= epsilon) continue;
            double sign = resid > 0.0 ? 1.0 : -1.0;
            for (std::size_t j = 0; j < d; ++j) grad[j] -= c * sign * x(r, j);
            grad_b -= c * sign;
        }
        double eta = eta0 / (1.0 + 0.05 * static_cast<double>(t));
        for (std::size_t j = 0; j < d; ++j) w[j] -= eta * grad[j];
        b -= eta * grad_b;
        if (t >= epochs - tail) {
            for (std::size_t j = 0; j < d; ++j) w_avg[j] += w[j] / static_cast<double>(tail);
            b_avg += b / static_cast<double>(tail);
        }
    }

    FittedModel out;
    out.kind = ModelKind::Svr;
    out.n_features = d;
    out.meta.iterations = epochs;
    out.params = SvrModel{std::move(w_avg), b_avg};
    return out;
}

// ---------------------------------------------------------------------------
// single-hidden-layer MLP (sigmoid hidden units, backprop)

namespace detail {

inline double mlp_forward(const MlpModel& m, const double* row, std::vector<double>& hidden) {
    const std::size_t d = m.w1.rows(), h = m.w1.cols();
    for (std::size_t j = 0; j < h; ++j) hidden[j] = m.b1[j];
    for (std::size_t i = 0; i < d; ++i) {
        double xi = row[i];
        if (xi == 0.0) continue;
        const double* wrow = m.w1.row_ptr(i);
        for (std::size_t j = 0; j < h; ++j) hidden[j] += xi * wrow[j];
    }
    double out = m.b2;
    for (std::size_t j = 0; j < h; ++j) {
        hidden[j] = sigmoid(hidden[j]);
        out += m.w2[j] * hidden[j];
    }
    return m.classification ? sigmoid(out) : out;
}

}  // namespace detail

struct MlpGradient {
    Matrix w1;
    std::vector<double> b1, w2;
    double b2 = 0.0;
};

// Loss and gradient on a batch: mean squared error / 2 for regression, mean
// log-loss for classification. Shared by the trainer and the gradient tests.
inline std::pair<double, MlpGradient> mlp_loss_gradient(const MlpModel& m, const Matrix& x,
                                                        const std::vector<double>& y) {
    const std::size_t n = x.rows(), d = m.w1.rows(), h = m.w1.cols();
    MlpGradient g;
    g.w1 = Matrix(d, h);
    g.b1.assign(h, 0.0);
    g.w2.assign(h, 0.0);
    double loss = 0.0;
    std::vector<double> hidden(h);
    for (std::size_t r = 0; r < n; ++r) {
        double pred = detail::mlp_forward(m, x.row_ptr(r), hidden);
        double delta;  // d loss / d (output preactivation), per sample
        if (m.classification) {
            loss += -(y[r] * std::log(pred) + (1.0 - y[r]) * std::log(1.0 - pred));
            delta = pred - y[r];
        } else {
            double e = pred - y[r];
            loss += 0.5 * e * e;
            delta = e;
        }
        g.b2 += delta;
        for (std::size_t j = 0; j < h; ++j) {
            g.w2[j] += delta * hidden[j];
            double dh = delta * m.w2[j] * hidden[j] * (1.0 - hidden[j]);
            g.b1[j] += dh;
            const double* row = x.row_ptr(r);
            for (std::size_t i = 0; i < d; ++i) g.w1(i, j) += dh * row[i];
        }
    }
    double inv = 1.0 / static_cast<double>(n);
    loss *= inv;
    g.b2 *= inv;
    for (auto& v : g.w1.data()) v *= inv;
    for (auto& v : g.b1) v *= inv;
    for (auto& v : g.w2) v *= inv;
    return {loss, std::move(g)};
}

// Init draws (uniform, scaled by 1/sqrt(fan-in)) come in the order w1
// row-major, then w2; biases start at zero. Mini-batch order is reshuffled
// per epoch.
inline FittedModel fit_mlp(const Matrix& x, const std::vector<double>& y, bool classification,
                           std::size_t hidden, double lr, std::size_t epochs, std::size_t batch,
                           std::uint64_t seed) {
    const std::size_t n = x.rows(), d = x.cols();
    if (y.size() != n) throw DataError("fit_mlp: target length mismatch");
    if (epochs < 1) throw ConfigError("fit_mlp: epochs must be >= 1");
    if (hidden == 0) hidden = std::max<std::size_t>(4, d / 2);
    if (classification)
        for (double v : y)
            if (v != 0.0 && v != 1.0) throw DataError("fit_mlp: labels must be 0/1");

    RngStream rng(seed);
    MlpModel m;
    m.classification = classification;
    m.w1 = Matrix(d, hidden);
    double r1 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, d)));
    for (auto& v : m.w1.data()) v = rng.uniform(-r1, r1);
    m.b1.assign(hidden, 0.0);
    m.w2.resize(hidden);
    double r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto& v : m.w2) v = rng.uniform(-r2, r2);
    m.b2 = 0.0;

    const std::size_t bs = std::min(batch < 1 ? std::size_t{1} : batch, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        if (bs < n) rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += bs) {
            std::size_t stop = std::min(start + bs, n);
            Matrix bx(stop - start, d);
            std::vector<double> by(stop - start);
            for (std::size_t r = start; r < stop; ++r) {
                for (std::size_t c = 0; c < d; ++c) bx(r - start, c) = x(order[r], c);
                by[r - start] = y[order[r]];
            }
            auto [loss, grad] = mlp_loss_gradient(m, bx, by);
            (void)loss;
            for (std::size_t i = 0; i < m.w1.size(); ++i)
                m.w1.data()[i] -= lr * grad.w1.data()[i];
            for (std::size_t j = 0; j < hidden; ++j) {
                m.b1[j] -= lr * grad.b1[j];
                m.w2[j] -= lr * grad.w2[j];
            }
            m.b2 -= lr * grad.b2;
        }
    }

    FittedModel out;
    out.kind = ModelKind::Mlp;
    out.n_features = d;
    out.meta.seed = seed;
    out.meta.iterations = epochs;
    out.params = std::move(m);
    return out;
}

// ---------------------------------------------------------------------------
// unified fitting and prediction

inline FittedModel fit_model(const Matrix& x, const std::vector<double>& y, TaskKind task,
                             const ModelConfig& cfg, std::uint64_t seed = 0) {
    const bool classification = task == TaskKind::Classification;
    switch (cfg.kind) {
        case ModelKind::Logistic:
            if (!classification) throw ConfigError("logistic model needs a classification task");
            return fit_logistic(x, y, cfg.logistic_l2);
        case ModelKind::Tree:
            return fit_tree(x, y, classification, cfg.tree_max_depth, cfg.tree_min_leaf);
        case ModelKind::Linear:
        case ModelKind::Ridge:
        case ModelKind::Lasso:
            if (classification) throw ConfigError("linear-family models need a regression task");
            return fit_linear_family(x, y, cfg.kind, cfg.linear_lambda);
        case ModelKind::Svr:
            if (classification) throw ConfigError("svr needs a regression task");
            return fit_svr(x, y, cfg.svr_c, cfg.svr_epsilon);
        case ModelKind::Mlp: {
            FittedModel m = fit_mlp(x, y, classification, cfg.mlp_hidden, cfg.mlp_lr,
                                    cfg.mlp_epochs, cfg.mlp_batch, seed);
            return m;
        }
    }
    throw ConfigError("fit_model: unknown kind");
}

inline std::vector<double> predict(const FittedModel& model, const Matrix& x) {
    if (x.cols() != model.n_features)
        throw DataError("predict: feature width " + std::to_string(x.cols()) +
                        " != training width " + std::to_string(model.n_features));
    std::vector<double> out(x.rows());
    if (const auto* lg = std::get_if<LogisticModel>(&model.params)) {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            double e = lg->beta[0];
            for (std::size_t c = 0; c < x.cols(); ++c) e += x(r, c) * lg->beta[c + 1];
            out[r] = sigmoid(e);
        }
    } else if (const auto* tree = std::get_if<TreeModel>(&model.params)) {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            std::size_t node = 0;
            while (!tree->nodes[node].leaf) {
                const auto& nd = tree->nodes[node];
                node = x(r, nd.feature) <= nd.threshold ? nd.left : nd.right;
            }
            out[r] = tree->nodes[node].value;
        }
    } else if (const auto* lin = std::get_if<LinearModel>(&model.params)) {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            double e = lin->intercept;
            for (std::size_t c = 0; c < x.cols(); ++c) e += x(r, c) * lin->coef[c];
            out[r] = e;
        }
    } else if (const auto* svr = std::get_if<SvrModel>(&model.params)) {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            double e = svr->b;
            for (std::size_t c = 0; c < x.cols(); ++c) e += x(r, c) * svr->w[c];
            out[r] = e;
        }
    } else if (const auto* mlp = std::get_if<MlpModel>(&model.params)) {
        std::vector<double> hidden(mlp->w1.cols());
        for (std::size_t r = 0; r < x.rows(); ++r)
            out[r] = detail::mlp_forward(*mlp, x.row_ptr(r), hidden);
    }
    if (!all_finite(out)) throw NumericError("predict: non-finite prediction");
    return out;
}

}  // namespace xdbn
