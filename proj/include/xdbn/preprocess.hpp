#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xdbn/dataset.hpp"
#include "xdbn/error.hpp"
#include "xdbn/matrix.hpp"
#include "xdbn/numeric.hpp"
#include "xdbn/rng.hpp"

namespace xdbn {

// ---------------------------------------------------------------------------
// standardization

struct StandardizeStats {
    std::vector<std::size_t> columns;
    std::vector<double> mean;
    std::vector<double> stddev;        // sample std, divisor n-1
    std::vector<bool> passthrough;     // constant columns left unchanged
};

// Fits per-column stats and returns the transformed matrix. Stats are meant
// to be re-applied to held-out rows with apply_standardize.
inline std::pair<Matrix, StandardizeStats> standardize(const Matrix& data,
                                                       const std::vector<std::size_t>& columns,
                                                       bool constant_passthrough = false) {
    if (data.rows() < 2) throw DataError("standardize needs at least 2 samples");
    Matrix out = data;
    StandardizeStats stats;
    stats.columns = columns;
    for (std::size_t c : columns) {
        if (c >= data.cols())
            throw DataError("standardize: column index " + std::to_string(c) + " out of range");
        std::vector<double> col = data.column(c);
        double m = mean(col);
        double s = sample_std(col);
        if (s <= 0.0) {
            if (!constant_passthrough)
                throw DataError("standardize: column " + std::to_string(c) +
                                " has zero variance");
            stats.mean.push_back(0.0);
            stats.stddev.push_back(1.0);
            stats.passthrough.push_back(true);
            continue;
        }
        stats.mean.push_back(m);
        stats.stddev.push_back(s);
        stats.passthrough.push_back(false);
        for (std::size_t r = 0; r < data.rows(); ++r) out(r, c) = (data(r, c) - m) / s;
    }
    return {std::move(out), std::move(stats)};
}

inline Matrix apply_standardize(const Matrix& data, const StandardizeStats& stats) {
    Matrix out = data;
    for (std::size_t i = 0; i < stats.columns.size(); ++i) {
        if (stats.passthrough[i]) continue;
        std::size_t c = stats.columns[i];
        for (std::size_t r = 0; r < data.rows(); ++r)
            out(r, c) = (data(r, c) - stats.mean[i]) / stats.stddev[i];
    }
    return out;
}

inline Matrix invert_standardize(const Matrix& data, const StandardizeStats& stats) {
    Matrix out = data;
    for (std::size_t i = 0; i < stats.columns.size(); ++i) {
        if (stats.passthrough[i]) continue;
        std::size_t c = stats.columns[i];
        for (std::size_t r = 0; r < data.rows(); ++r)
            out(r, c) = data(r, c) * stats.stddev[i] + stats.mean[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// min-max rescaling to [0,1] (sigmoid-unit network inputs)

struct MinMaxStats {
    std::vector<double> min;
    std::vector<double> range;  // 0 for constant columns, which map to 0
};

inline std::pair<Matrix, MinMaxStats> minmax_rescale(const Matrix& data) {
    MinMaxStats stats;
    stats.min.resize(data.cols());
    stats.range.resize(data.cols());
    for (std::size_t c = 0; c < data.cols(); ++c) {
        double lo = data(0, c), hi = data(0, c);
        for (std::size_t r = 1; r < data.rows(); ++r) {
            lo = std::min(lo, data(r, c));
            hi = std::max(hi, data(r, c));
        }
        stats.min[c] = lo;
        stats.range[c] = hi - lo;
    }
    Matrix out(data.rows(), data.cols());
    for (std::size_t c = 0; c < data.cols(); ++c)
        for (std::size_t r = 0; r < data.rows(); ++r)
            out(r, c) = stats.range[c] > 0.0 ? (data(r, c) - stats.min[c]) / stats.range[c] : 0.0;
    return {std::move(out), std::move(stats)};
}

// Held-out rows are clamped into [0,1] after rescaling with training stats.
inline Matrix apply_minmax(const Matrix& data, const MinMaxStats& stats) {
    Matrix out(data.rows(), data.cols());
    for (std::size_t c = 0; c < data.cols(); ++c)
        for (std::size_t r = 0; r < data.rows(); ++r) {
            double v = stats.range[c] > 0.0 ? (data(r, c) - stats.min[c]) / stats.range[c] : 0.0;
            out(r, c) = std::clamp(v, 0.0, 1.0);
        }
    return out;
}

// ---------------------------------------------------------------------------
// one-hot encoding

// Replaces `column` with one {0,1} indicator per category, in place in the
// column order. Categories default to the distinct values present (numeric
// ascending, labels lexicographic); an explicit list freezes both the set and
// the output order, and unseen values become errors. `output_names` optionally
// overrides the generated `<column>_<category>` names.
inline Dataset one_hot(const Dataset& data, const std::string& column,
                       const std::optional<std::vector<std::string>>& categories = std::nullopt,
                       const std::optional<std::vector<std::string>>& output_names = std::nullopt) {
    const std::size_t c = data.col_index(column);
    const ColumnSpec& spec = data.schema[c];
    const std::size_t nrows = data.n_samples();

    // canonical string per row value
    std::vector<std::string> row_labels(nrows);
    for (std::size_t r = 0; r < nrows; ++r) {
        double v = data.features(r, c);
        if (spec.kind == ColumnKind::Categorical && !spec.labels.empty()) {
            auto code = static_cast<std::size_t>(v);
            if (code >= spec.labels.size())
                throw DataError("one_hot: label code out of range in column '" + column + "'");
            row_labels[r] = spec.labels[code];
        } else {
            row_labels[r] = category_label(v);
        }
    }

    std::vector<std::string> cats;
    if (categories) {
        cats = *categories;
        if (cats.empty()) throw DataError("one_hot: empty category list for '" + column + "'");
        std::set<std::string> allowed(cats.begin(), cats.end());
        for (std::size_t r = 0; r < nrows; ++r)
            if (!allowed.count(row_labels[r]))
                throw DataError("one_hot: unseen category '" + row_labels[r] + "' in column '" +
                                column + "'");
    } else {
        if (spec.kind == ColumnKind::Numeric || spec.labels.empty()) {
            std::set<double> vals;
            for (std::size_t r = 0; r < nrows; ++r) vals.insert(data.features(r, c));
            for (double v : vals) cats.push_back(category_label(v));
        } else {
            std::set<std::string> vals(row_labels.begin(), row_labels.end());
            cats.assign(vals.begin(), vals.end());
        }
    }
    if (output_names && output_names->size() != cats.size())
        throw DataError("one_hot: " + std::to_string(output_names->size()) + " output names for " +
                        std::to_string(cats.size()) + " categories in '" + column + "'");

    std::map<std::string, std::size_t> cat_index;
    for (std::size_t i = 0; i < cats.size(); ++i) cat_index[cats[i]] = i;

    const std::size_t new_cols = data.n_features() - 1 + cats.size();
    Dataset out;
    out.features = Matrix(nrows, new_cols);
    out.schema.reserve(new_cols);
    out.target = data.target;
    out.has_target = data.has_target;
    out.target_name = data.target_name;

    std::size_t oc = 0;
    for (std::size_t src = 0; src < data.n_features(); ++src) {
        if (src != c) {
            for (std::size_t r = 0; r < nrows; ++r) out.features(r, oc) = data.features(r, src);
            out.schema.push_back(data.schema[src]);
            ++oc;
            continue;
        }
        for (std::size_t k = 0; k < cats.size(); ++k) {
            ColumnSpec ind;
            ind.name = output_names ? (*output_names)[k] : column + "_" + cats[k];
            ind.kind = ColumnKind::OneHotDerived;
            ind.source_column = column;
            ind.source_value = cats[k];
            out.schema.push_back(std::move(ind));
        }
        for (std::size_t r = 0; r < nrows; ++r)
            out.features(r, oc + cat_index.at(row_labels[r])) = 1.0;
        oc += cats.size();
    }
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// SMOTE

// Synthetic minority rows: x + lambda * (nn - x) for a random minority row x,
// a uniformly chosen one of its k Euclidean nearest neighbors, and lambda
// uniform on [0,1]. Draw order per synthetic row: row index, neighbor index,
// lambda.
inline Matrix smote(const Matrix& minority, std::size_t k, std::size_t n_synthetic,
                    RngStream& rng) {
    const std::size_t n = minority.rows();
    const std::size_t d = minority.cols();
    if (n < 2) throw DataError("smote: need at least 2 minority rows");
    if (k < 1) throw DataError("smote: k must be >= 1");
    if (n <= k)
        throw DataError("smote: minority rows (" + std::to_string(n) +
                        ") must exceed neighbor count k (" + std::to_string(k) + ")");
    if (n_synthetic == 0) return Matrix(0, d);

    // brute-force k nearest neighbors per row (self excluded)
    std::vector<std::vector<std::size_t>> nn(n);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            const double* a = minority.row_ptr(i);
            const double* b = minority.row_ptr(j);
            for (std::size_t t = 0; t < d; ++t) {
                double diff = a[t] - b[t];
                s += diff * diff;
            }
            dist[j] = {i == j ? std::numeric_limits<double>::infinity() : s, j};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        nn[i].resize(k);
        for (std::size_t t = 0; t < k; ++t) nn[i][t] = dist[t].second;
    }

    Matrix out(n_synthetic, d);
    for (std::size_t s = 0; s < n_synthetic; ++s) {
        std::size_t i = static_cast<std::size_t>(rng.below(n));
        std::size_t j = nn[i][static_cast<std::size_t>(rng.below(k))];
        double lambda = rng.uniform01();
        const double* a = minority.row_ptr(i);
        const double* b = minority.row_ptr(j);
        for (std::size_t t = 0; t < d; ++t) out(s, t) = a[t] + lambda * (b[t] - a[t]);
    }
    out.require_finite("smote");
    return out;
}

// ---------------------------------------------------------------------------
// combined random over/undersampling

// Rebalances a binary-target dataset so the positive fraction is within one
// sample of `target_pos_fraction`. Classes below their quota are oversampled
// with replacement (originals kept), classes above are undersampled without
// replacement. `total` defaults to the current sample count.
inline Dataset random_over_under(const Dataset& data, double target_pos_fraction, RngStream& rng,
                                 std::size_t total = 0) {
    if (!data.has_target) throw DataError("random_over_under: dataset has no target");
    if (!(target_pos_fraction > 0.0 && target_pos_fraction < 1.0))
        throw DataError("random_over_under: target fraction must be in (0,1)");
    std::vector<std::size_t> pos, neg;
    for (std::size_t r = 0; r < data.n_samples(); ++r) {
        double y = data.target[r];
        if (y == 1.0) pos.push_back(r);
        else if (y == 0.0) neg.push_back(r);
        else throw DataError("random_over_under: target is not binary 0/1");
    }
    if (pos.empty() || neg.empty()) throw DataError("random_over_under: a class is absent");
    if (total == 0) total = data.n_samples();
    auto want_pos = static_cast<std::size_t>(std::llround(target_pos_fraction * static_cast<double>(total)));
    want_pos = std::min(std::max<std::size_t>(want_pos, 1), total - 1);
    std::size_t want_neg = total - want_pos;

    auto resize_class = [&](const std::vector<std::size_t>& rows, std::size_t want,
                            std::vector<std::size_t>& kept, std::vector<std::size_t>& extra) {
        if (want >= rows.size()) {
            kept = rows;
            for (std::size_t i = rows.size(); i < want; ++i)
                extra.push_back(rows[static_cast<std::size_t>(rng.below(rows.size()))]);
        } else {
            std::vector<std::size_t> chosen = rng.sample_without_replacement(rows.size(), want);
            std::sort(chosen.begin(), chosen.end());
            for (std::size_t c : chosen) kept.push_back(rows[c]);
        }
    };
    std::vector<std::size_t> kept_pos, extra_pos, kept_neg, extra_neg;
    resize_class(pos, want_pos, kept_pos, extra_pos);
    resize_class(neg, want_neg, kept_neg, extra_neg);

    // retained originals in original row order, then oversample duplicates
    std::vector<std::size_t> rows;
    rows.reserve(total);
    std::merge(kept_pos.begin(), kept_pos.end(), kept_neg.begin(), kept_neg.end(),
               std::back_inserter(rows));
    rows.insert(rows.end(), extra_pos.begin(), extra_pos.end());
    rows.insert(rows.end(), extra_neg.begin(), extra_neg.end());

    Dataset out;
    out.schema = data.schema;
    out.has_target = true;
    out.target_name = data.target_name;
    out.features = Matrix(rows.size(), data.n_features());
    out.target.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < data.n_features(); ++c)
            out.features(i, c) = data.features(rows[i], c);
        out.target[i] = data.target[rows[i]];
    }
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// stratified splitting

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> holdout;
};

namespace detail {

// class id per row: labels themselves, or decile bins by target rank
inline std::vector<std::size_t> strata_of(const std::vector<double>& target, TaskKind task) {
    const std::size_t n = target.size();
    std::vector<std::size_t> strata(n);
    if (task == TaskKind::Classification) {
        std::map<double, std::size_t> ids;
        for (std::size_t i = 0; i < n; ++i) {
            auto it = ids.find(target[i]);
            if (it == ids.end()) it = ids.emplace(target[i], ids.size()).first;
            strata[i] = it->second;
        }
    } else {
        std::size_t bins = std::min<std::size_t>(10, std::max<std::size_t>(1, n / 2));
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return target[a] < target[b]; });
        for (std::size_t pos = 0; pos < n; ++pos) strata[order[pos]] = pos * bins / n;
    }
    return strata;
}

}  // namespace detail

// Per-class shuffle then cut at round(fraction * class size), clamped so both
// sides keep at least one sample of every class.
inline SplitIndices stratified_split(const std::vector<double>& target, double train_fraction,
                                     RngStream& rng, TaskKind task = TaskKind::Classification) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DataError("stratified_split: train fraction must be in (0,1)");
    std::vector<std::size_t> strata = detail::strata_of(target, task);
    std::size_t n_strata = 0;
    for (std::size_t s : strata) n_strata = std::max(n_strata, s + 1);
    std::vector<std::vector<std::size_t>> groups(n_strata);
    for (std::size_t i = 0; i < target.size(); ++i) groups[strata[i]].push_back(i);

    SplitIndices out;
    for (std::size_t g = 0; g < n_strata; ++g) {
        auto& rows = groups[g];
        if (rows.size() < 2)
            throw DataError("stratified_split: stratum " + std::to_string(g) +
                            " has fewer than 2 samples");
        rng.shuffle(rows);
        auto want = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(rows.size())));
        want = std::min(std::max<std::size_t>(want, 1), rows.size() - 1);
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < want ? out.train : out.holdout).push_back(rows[i]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.holdout.begin(), out.holdout.end());
    return out;
}

// Row subset of a dataset in the given index order.
inline Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.schema = data.schema;
    out.has_target = data.has_target;
    out.target_name = data.target_name;
    out.features = Matrix(rows.size(), data.n_features());
    if (data.has_target) out.target.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < data.n_features(); ++c)
            out.features(i, c) = data.features(rows[i], c);
        if (data.has_target) out.target[i] = data.target[rows[i]];
    }
    return out;
}

}  // namespace xdbn
