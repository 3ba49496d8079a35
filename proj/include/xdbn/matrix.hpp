#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "xdbn/error.hpp"
#include "xdbn/numeric.hpp"

namespace xdbn {

// Dense row-major matrix of doubles. Immutable by convention once handed to
// another component; all public library operations leave every entry finite.
class Matrix {
   public:
    Matrix() : rows_(0), cols_(0) {}

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw NumericError("ragged initializer for Matrix");
            for (double v : r) data_.push_back(v);
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(row_ptr(r), cols_);
    }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    bool is_finite() const { return all_finite(data_); }

    void require_finite(const char* what) const {
        if (!is_finite()) throw NumericError(std::string(what) + ": non-finite entry");
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

   private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

inline Matrix transposed(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
    return t;
}

// Standard product; ikj loop order keeps the inner accesses contiguous.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw NumericError("matmul: dimension mismatch " + a.shape_str() + " * " + b.shape_str());
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* orow = out.row_ptr(i);
        const double* arow = a.row_ptr(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    out.require_finite("matmul");
    return out;
}

// Solves A x = b for symmetric positive definite A by Cholesky, escalating a
// diagonal jitter on failure (unless allow_jitter is false). Throws
// NumericError once the jitter cap is hit.
inline std::vector<double> solve_spd(Matrix a, std::vector<double> b,
                                     double initial_jitter = 0.0, bool allow_jitter = true) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n)
        throw NumericError("solve_spd: shape mismatch " + a.shape_str());
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(a(i, i)));
    if (scale == 0.0) scale = 1.0;

    const int max_attempts = allow_jitter ? 12 : 1;
    double jitter = initial_jitter;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Matrix l = a;
        if (jitter > 0.0)
            for (std::size_t i = 0; i < n; ++i) l(i, i) += jitter;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = l(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
                if (i == j) {
                    if (s <= 0.0 || !std::isfinite(s)) {
                        ok = false;
                        break;
                    }
                    l(i, i) = std::sqrt(s);
                } else {
                    l(i, j) = s / l(j, j);
                }
            }
        }
        if (ok) {
            // forward then backward substitution
            std::vector<double> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                double s = b[i];
                for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
                y[i] = s / l(i, i);
            }
            std::vector<double> x(n);
            for (std::size_t ii = n; ii-- > 0;) {
                double s = y[ii];
                for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
                x[ii] = s / l(ii, ii);
            }
            if (!all_finite(x)) throw NumericError("solve_spd: non-finite solution");
            return x;
        }
        jitter = (jitter == 0.0) ? scale * 1e-12 : jitter * 100.0;
    }
    throw NumericError(allow_jitter
                           ? "solve_spd: matrix not positive definite after jitter escalation"
                           : "solve_spd: matrix not positive definite");
}

// Diagonal of the inverse of an SPD matrix (column-by-column Cholesky solves).
inline std::vector<double> spd_inverse_diagonal(const Matrix& a, double initial_jitter = 0.0) {
    const std::size_t n = a.rows();
    std::vector<double> diag(n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        std::vector<double> x = solve_spd(a, e, initial_jitter);
        diag[j] = x[j];
        e[j] = 0.0;
    }
    return diag;
}

}  // namespace xdbn
