#pragma once

// CSV ingestion against a declared column schema and round-trip-exact output.
// Cells that fail to parse for their declared kind become missing values and
// are recorded in the load diagnostics rather than aborting the load.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "causalkit/column.hpp"
#include "causalkit/common.hpp"
#include "causalkit/table.hpp"

namespace causalkit {

struct CellIssue {
    std::size_t row = 0;  // 0-based data row (header excluded)
    std::string column;
    std::string raw;
};

struct LoadResult {
    DataTable table;
    std::size_t n_rows_read = 0;
    std::vector<CellIssue> parse_failures;  // turned into missing cells
};

namespace detail {

// RFC-4180-style field splitting with double-quote escaping.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

inline bool parse_double(const std::string& s, double* out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size()) return false;
    if (!std::isfinite(v)) return false;
    *out = v;
    return true;
}

inline bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "NULL" ||
           s == "null";
}

inline std::string quote_csv(const std::string& s) {
    bool needs = false;
    for (char ch : s) {
        if (ch == ',' || ch == '"' || ch == '\n') {
            needs = true;
            break;
        }
    }
    if (!needs) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        out += ch;
    }
    out += '"';
    return out;
}

}  // namespace detail

// Reads a comma-separated file with a header row. The header must contain
// every declared column (extra file columns are ignored). Cell values that
// do not parse for the declared kind become missing and are reported.
inline LoadResult load_csv(const std::string& path, const std::vector<ColumnSpec>& schema) {
    if (schema.empty()) throw UsageError("load_csv: empty schema");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open file: '" + path + "'");

    std::string header_line;
    if (!std::getline(in, header_line)) throw Error("empty file: '" + path + "'");
    const std::vector<std::string> header = detail::split_csv_line(header_line);

    std::map<std::string, std::size_t> header_index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        header_index[detail::trim(header[i])] = i;
    }

    std::vector<std::size_t> field_of_column(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
        auto it = header_index.find(schema[c].name);
        if (it == header_index.end()) {
            throw Error("missing column in header: '" + schema[c].name + "'");
        }
        field_of_column[c] = it->second;
    }

    // staging: raw string cells, then per-kind conversion
    std::vector<std::vector<std::string>> raw(schema.size());
    std::string line;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const std::size_t f = field_of_column[c];
            raw[c].push_back(f < fields.size() ? detail::trim(fields[f]) : std::string());
        }
        ++n_rows;
    }

    LoadResult result;
    result.n_rows_read = n_rows;

    std::vector<Column> columns;
    columns.reserve(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
        Column col;
        col.spec = schema[c];
        col.missing.assign(n_rows, 0);
        auto fail = [&](std::size_t r) {
            col.missing[r] = 1;
            result.parse_failures.push_back(CellIssue{r, schema[c].name, raw[c][r]});
        };
        switch (schema[c].kind) {
            case ColumnKind::Numeric: {
                std::vector<double> vals(n_rows, 0.0);
                for (std::size_t r = 0; r < n_rows; ++r) {
                    if (detail::is_missing_token(raw[c][r])) {
                        col.missing[r] = 1;
                    } else if (!detail::parse_double(raw[c][r], &vals[r])) {
                        fail(r);
                    }
                }
                col.values = std::move(vals);
                break;
            }
            case ColumnKind::Binary: {
                std::vector<std::int8_t> vals(n_rows, 0);
                for (std::size_t r = 0; r < n_rows; ++r) {
                    const std::string& s = raw[c][r];
                    if (detail::is_missing_token(s)) {
                        col.missing[r] = 1;
                    } else if (s == "0" || s == "false" || s == "False") {
                        vals[r] = 0;
                    } else if (s == "1" || s == "true" || s == "True") {
                        vals[r] = 1;
                    } else {
                        fail(r);
                    }
                }
                col.values = std::move(vals);
                break;
            }
            case ColumnKind::Date: {
                std::vector<Date> vals(n_rows);
                for (std::size_t r = 0; r < n_rows; ++r) {
                    if (detail::is_missing_token(raw[c][r])) {
                        col.missing[r] = 1;
                    } else if (!Date::parse(raw[c][r], vals[r])) {
                        fail(r);
                    }
                }
                col.values = std::move(vals);
                break;
            }
            case ColumnKind::Categorical: {
                // two passes: collect levels sorted, then encode
                std::map<std::string, std::int32_t> level_of;
                for (std::size_t r = 0; r < n_rows; ++r) {
                    if (!detail::is_missing_token(raw[c][r])) level_of[raw[c][r]] = 0;
                }
                CategoricalStorage storage;
                storage.levels.reserve(level_of.size());
                for (auto& [lvl, code] : level_of) {
                    code = static_cast<std::int32_t>(storage.levels.size());
                    storage.levels.push_back(lvl);
                }
                storage.codes.assign(n_rows, 0);
                for (std::size_t r = 0; r < n_rows; ++r) {
                    if (detail::is_missing_token(raw[c][r])) {
                        col.missing[r] = 1;
                    } else {
                        storage.codes[r] = level_of[raw[c][r]];
                    }
                }
                col.values = std::move(storage);
                break;
            }
        }
        columns.push_back(std::move(col));
    }

    result.table = DataTable(std::move(columns));
    return result;
}

// Writes the table with a header row. Floats use shortest round-trip-exact
// formatting so load(write(t)) == t for finite values.
inline void write_csv(const std::string& path, const DataTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write file: '" + path + "'");

    const auto& cols = table.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c > 0) out << ',';
        out << detail::quote_csv(cols[c].spec.name);
    }
    out << '\n';

    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c > 0) out << ',';
            if (cols[c].missing[r]) continue;  // empty cell
            std::visit(
                [&](const auto& vals) {
                    using V = std::decay_t<decltype(vals)>;
                    if constexpr (std::is_same_v<V, CategoricalStorage>) {
                        out << detail::quote_csv(
                            vals.levels[static_cast<std::size_t>(vals.codes[r])]);
                    } else if constexpr (std::is_same_v<V, std::vector<double>>) {
                        out << format_double(vals[r]);
                    } else if constexpr (std::is_same_v<V, std::vector<std::int8_t>>) {
                        out << (vals[r] ? '1' : '0');
                    } else {
                        out << vals[r].to_string();
                    }
                },
                cols[c].values);
        }
        out << '\n';
    }
    if (!out) throw Error("write failed: '" + path + "'");
}

}  // namespace causalkit
