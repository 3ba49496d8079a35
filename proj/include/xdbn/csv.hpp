#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "xdbn/dataset.hpp"
#include "xdbn/error.hpp"

// CSV interchange: mandatory header row, UTF-8, '.' decimal separator,
// RFC-4180 style quoting. Empty cells are rejected with their location.

namespace xdbn {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(c);
            }
        } else if (c == '"' && cell.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (c == '\r' && i + 1 == line.size()) {
            // tolerate CRLF input
        } else {
            cell.push_back(c);
        }
    }
    if (quoted) throw DataError("unterminated quote on line " + std::to_string(line_no));
    out.push_back(cell);
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + s.size();
}

inline std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace detail

inline Dataset load_csv(std::istream& in,
                        const std::optional<std::string>& target_column = std::nullopt) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV input is empty (header row is mandatory)");
    std::vector<std::string> header = detail::split_csv_line(line, 1);
    const std::size_t ncols = header.size();
    if (ncols == 0) throw DataError("CSV header has no columns");

    std::vector<std::vector<std::string>> cells(ncols);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        std::vector<std::string> row = detail::split_csv_line(line, line_no);
        if (row.size() != ncols)
            throw DataError("line " + std::to_string(line_no) + " has " +
                            std::to_string(row.size()) + " cells, expected " +
                            std::to_string(ncols));
        for (std::size_t c = 0; c < ncols; ++c) {
            if (row[c].empty())
                throw DataError("missing cell at row " + std::to_string(line_no) + ", column '" +
                                header[c] + "'");
            cells[c].push_back(std::move(row[c]));
        }
    }
    const std::size_t nrows = cells.empty() ? 0 : cells[0].size();
    if (nrows == 0) throw DataError("CSV has a header but no data rows");

    // a column is numeric iff every cell parses fully as a double
    Dataset ds;
    ds.features = Matrix(nrows, ncols);
    ds.schema.resize(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
        ds.schema[c].name = header[c];
        bool numeric = true;
        double v;
        for (std::size_t r = 0; r < nrows && numeric; ++r)
            numeric = detail::parse_double(cells[c][r], v) && std::isfinite(v);
        if (numeric) {
            ds.schema[c].kind = ColumnKind::Numeric;
            for (std::size_t r = 0; r < nrows; ++r) {
                detail::parse_double(cells[c][r], v);
                ds.features(r, c) = v;
            }
        } else {
            ds.schema[c].kind = ColumnKind::Categorical;
            std::map<std::string, std::size_t> codes;
            for (std::size_t r = 0; r < nrows; ++r) {
                auto it = codes.find(cells[c][r]);
                if (it == codes.end()) {
                    it = codes.emplace(cells[c][r], ds.schema[c].labels.size()).first;
                    ds.schema[c].labels.push_back(cells[c][r]);
                }
                ds.features(r, c) = static_cast<double>(it->second);
            }
        }
    }

    if (target_column) {
        std::size_t t = ds.col_index(*target_column);
        if (ds.schema[t].kind != ColumnKind::Numeric)
            throw DataError("target column '" + *target_column + "' is not numeric");
        ds.target = ds.features.column(t);
        ds.has_target = true;
        ds.target_name = *target_column;
        Matrix rest(nrows, ncols - 1);
        std::vector<ColumnSpec> schema;
        schema.reserve(ncols - 1);
        std::size_t out_c = 0;
        for (std::size_t c = 0; c < ncols; ++c) {
            if (c == t) continue;
            for (std::size_t r = 0; r < nrows; ++r) rest(r, out_c) = ds.features(r, c);
            schema.push_back(std::move(ds.schema[c]));
            ++out_c;
        }
        ds.features = std::move(rest);
        ds.schema = std::move(schema);
    }
    ds.validate();
    return ds;
}

inline Dataset load_csv_file(const std::string& path,
                             const std::optional<std::string>& target_column = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CSV file '" + path + "'");
    return load_csv(in, target_column);
}

inline void save_csv(const Dataset& ds, std::ostream& out) {
    ds.validate();
    for (std::size_t c = 0; c < ds.schema.size(); ++c) {
        if (c) out << ',';
        out << detail::quote_if_needed(ds.schema[c].name);
    }
    if (ds.has_target) out << ',' << detail::quote_if_needed(ds.target_name);
    out << '\n';
    for (std::size_t r = 0; r < ds.n_samples(); ++r) {
        for (std::size_t c = 0; c < ds.n_features(); ++c) {
            if (c) out << ',';
            const ColumnSpec& spec = ds.schema[c];
            double v = ds.features(r, c);
            if (spec.kind == ColumnKind::Categorical && !spec.labels.empty()) {
                auto code = static_cast<std::size_t>(v);
                if (code >= spec.labels.size())
                    throw DataError("categorical code out of range in column '" + spec.name + "'");
                out << detail::quote_if_needed(spec.labels[code]);
            } else {
                out << detail::format_double(v);
            }
        }
        if (ds.has_target) out << ',' << detail::format_double(ds.target[r]);
        out << '\n';
    }
}

inline void save_csv_file(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write CSV file '" + path + "'");
    save_csv(ds, out);
}

}  // namespace xdbn
