#pragma once

#include <charconv>
#include <string>
#include <unordered_set>
#include <vector>

#include "xdbn/error.hpp"
#include "xdbn/matrix.hpp"

namespace xdbn {

namespace detail {

// shortest round-trip decimal form
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

// Canonical string form of a numeric category value ("2", "-1", "2.5").
inline std::string category_label(double v) { return detail::format_double(v); }

enum class TaskKind { Classification, Regression };

enum class ColumnKind { Numeric, Categorical, OneHotDerived };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    // provenance for one-hot indicator columns
    std::string source_column;
    std::string source_value;
    // label-encoded categorical columns: code -> original string label
    std::vector<std::string> labels;
};

// Column-schema-tagged feature matrix plus optional target column. Values are
// always doubles; string-valued categorical columns are label-encoded with
// the code table kept in the schema.
struct Dataset {
    Matrix features;
    std::vector<double> target;
    bool has_target = false;
    std::string target_name;
    std::vector<ColumnSpec> schema;

    std::size_t n_samples() const { return features.rows(); }
    std::size_t n_features() const { return features.cols(); }

    std::size_t col_index(const std::string& name) const {
        for (std::size_t i = 0; i < schema.size(); ++i)
            if (schema[i].name == name) return i;
        throw DataError("no column named '" + name + "'");
    }

    bool has_column(const std::string& name) const {
        for (const auto& c : schema)
            if (c.name == name) return true;
        return false;
    }

    void validate() const {
        if (schema.size() != features.cols())
            throw DataError("schema size " + std::to_string(schema.size()) +
                            " does not match feature count " + std::to_string(features.cols()));
        if (has_target && target.size() != features.rows())
            throw DataError("target length " + std::to_string(target.size()) +
                            " does not match sample count " + std::to_string(features.rows()));
        std::unordered_set<std::string> names;
        for (const auto& c : schema) {
            if (!names.insert(c.name).second)
                throw DataError("duplicate column name '" + c.name + "'");
            if (c.kind == ColumnKind::OneHotDerived && c.source_column.empty())
                throw DataError("one-hot column '" + c.name + "' lacks a source column");
        }
        features.require_finite("dataset features");
        if (!all_finite(target)) throw NumericError("dataset target: non-finite entry");
    }
};

}  // namespace xdbn
