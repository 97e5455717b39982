#pragma once

// DataTable: immutable-after-construction typed column store for order data,
// plus the cleaning steps (row deletion for missing values, exact-duplicate
// removal), calendar-quarter derivation and delay summary statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "causalkit/column.hpp"
#include "causalkit/common.hpp"

namespace causalkit {

// Storage per kind. Categoricals are dictionary-encoded; `levels` is sorted
// so codes are independent of row order.
struct CategoricalStorage {
    std::vector<std::string> levels;
    std::vector<std::int32_t> codes;  // index into levels
};

using ColumnStorage = std::variant<std::vector<double>,       // Numeric
                                   CategoricalStorage,        // Categorical
                                   std::vector<std::int8_t>,  // Binary (0/1)
                                   std::vector<Date>>;        // Date

struct Column {
    ColumnSpec spec;
    ColumnStorage values;
    std::vector<char> missing;  // 1 where the cell is missing

    const std::vector<double>& numeric() const { return std::get<std::vector<double>>(values); }
    const CategoricalStorage& categorical() const { return std::get<CategoricalStorage>(values); }
    const std::vector<std::int8_t>& binary() const {
        return std::get<std::vector<std::int8_t>>(values);
    }
    const std::vector<Date>& dates() const { return std::get<std::vector<Date>>(values); }
};

class DataTable {
  public:
    DataTable() = default;
    explicit DataTable(std::vector<Column> columns) : columns_(std::move(columns)) {
        if (!columns_.empty()) {
            n_rows_ = column_size(columns_.front());
            for (const auto& c : columns_) {
                if (column_size(c) != n_rows_ || c.missing.size() != n_rows_) {
                    throw Error("DataTable: column '" + c.spec.name + "' has mismatched length");
                }
            }
        }
    }

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return columns_.size(); }
    const std::vector<Column>& columns() const { return columns_; }

    bool has_column(const std::string& name) const { return find(name) >= 0; }

    const Column& column(const std::string& name) const {
        const int idx = find(name);
        if (idx < 0) throw Error("no such column: '" + name + "'");
        return columns_[static_cast<std::size_t>(idx)];
    }

    bool row_has_missing(std::size_t row) const {
        for (const auto& c : columns_) {
            if (c.missing[row]) return true;
        }
        return false;
    }

    DataTable select_rows(const std::vector<std::size_t>& rows) const {
        std::vector<Column> out;
        out.reserve(columns_.size());
        for (const auto& c : columns_) {
            Column nc;
            nc.spec = c.spec;
            nc.missing.reserve(rows.size());
            for (std::size_t r : rows) nc.missing.push_back(c.missing[r]);
            std::visit(
                [&](const auto& vals) {
                    using V = std::decay_t<decltype(vals)>;
                    if constexpr (std::is_same_v<V, CategoricalStorage>) {
                        CategoricalStorage s;
                        s.levels = vals.levels;
                        s.codes.reserve(rows.size());
                        for (std::size_t r : rows) s.codes.push_back(vals.codes[r]);
                        nc.values = std::move(s);
                    } else {
                        V s;
                        s.reserve(rows.size());
                        for (std::size_t r : rows) s.push_back(vals[r]);
                        nc.values = std::move(s);
                    }
                },
                c.values);
            out.push_back(std::move(nc));
        }
        return DataTable(std::move(out));
    }

    DataTable with_column(Column col) const {
        if (column_size(col) != n_rows_ && n_cols() > 0) {
            throw Error("with_column: length mismatch for '" + col.spec.name + "'");
        }
        if (has_column(col.spec.name)) {
            throw Error("with_column: column '" + col.spec.name + "' already exists");
        }
        std::vector<Column> cols = columns_;
        cols.push_back(std::move(col));
        return DataTable(std::move(cols));
    }

    static std::size_t column_size(const Column& c) {
        return std::visit(
            [](const auto& vals) -> std::size_t {
                using V = std::decay_t<decltype(vals)>;
                if constexpr (std::is_same_v<V, CategoricalStorage>) {
                    return vals.codes.size();
                } else {
                    return vals.size();
                }
            },
            c.values);
    }

  private:
    int find(const std::string& name) const {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (columns_[i].spec.name == name) return static_cast<int>(i);
        }
        return -1;
    }

    std::vector<Column> columns_;
    std::size_t n_rows_ = 0;
};

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

struct CleanResult {
    DataTable table;
    std::size_t removed_missing = 0;
    std::size_t removed_duplicates = 0;
};

namespace detail {

// row key over non-ignored columns; exact value match
inline std::string row_key(const DataTable& t, std::size_t row) {
    std::string key;
    for (const auto& c : t.columns()) {
        if (c.spec.role == Role::Ignored) continue;
        std::visit(
            [&](const auto& vals) {
                using V = std::decay_t<decltype(vals)>;
                if constexpr (std::is_same_v<V, CategoricalStorage>) {
                    key += vals.levels[static_cast<std::size_t>(vals.codes[row])];
                } else if constexpr (std::is_same_v<V, std::vector<double>>) {
                    key += format_double(vals[row]);
                } else if constexpr (std::is_same_v<V, std::vector<std::int8_t>>) {
                    key += vals[row] ? '1' : '0';
                } else {
                    key += vals[row].to_string();
                }
            },
            c.values);
        key += '\x1f';
    }
    return key;
}

}  // namespace detail

// Removes rows containing missing cells, then exact duplicates over the
// non-ignored columns (first occurrence kept, order preserved). Idempotent.
inline CleanResult clean(const DataTable& table) {
    std::vector<std::size_t> complete;
    complete.reserve(table.n_rows());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        if (!table.row_has_missing(r)) complete.push_back(r);
    }
    const std::size_t removed_missing = table.n_rows() - complete.size();

    DataTable no_missing = table.select_rows(complete);

    std::vector<std::size_t> keep;
    keep.reserve(no_missing.n_rows());
    std::unordered_map<std::string, bool> seen;
    seen.reserve(no_missing.n_rows() * 2);
    for (std::size_t r = 0; r < no_missing.n_rows(); ++r) {
        const std::string key = detail::row_key(no_missing, r);
        if (!seen.emplace(key, true).second) continue;
        keep.push_back(r);
    }
    const std::size_t removed_duplicates = no_missing.n_rows() - keep.size();

    CleanResult result{no_missing.select_rows(keep), removed_missing, removed_duplicates};
    if (result.table.n_rows() == 0 && table.n_rows() > 0) {
        throw Error("clean: all rows removed");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Quarter derivation
// ---------------------------------------------------------------------------

// Adds a categorical "Season" column with Q1..Q4 by calendar quarter of the
// given date column. Missing dates yield missing Season cells.
inline DataTable derive_quarter(const DataTable& table, const std::string& date_column,
                                const std::string& season_name = "Season") {
    const Column& dc = table.column(date_column);
    if (dc.spec.kind != ColumnKind::Date) {
        throw Error("derive_quarter: column '" + date_column + "' is not a date column");
    }
    CategoricalStorage storage;
    storage.levels = {"Q1", "Q2", "Q3", "Q4"};
    storage.codes.reserve(table.n_rows());
    std::vector<char> missing;
    missing.reserve(table.n_rows());
    const auto& dates = dc.dates();
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        if (dc.missing[r]) {
            storage.codes.push_back(0);
            missing.push_back(1);
        } else {
            storage.codes.push_back(dates[r].quarter() - 1);
            missing.push_back(0);
        }
    }
    Column season;
    season.spec = ColumnSpec{season_name, ColumnKind::Categorical, Role::Covariate};
    season.values = std::move(storage);
    season.missing = std::move(missing);
    return table.with_column(std::move(season));
}

// ---------------------------------------------------------------------------
// Delay summary
// ---------------------------------------------------------------------------

// A delay counts as such only when strictly positive. Mean/std/max are
// reported over the delayed orders (matching the usual reporting convention
// for delay tables) with all-order variants kept alongside, since the
// convention is ambiguous in the wild.
struct DelayStats {
    double delayed_rate = 0.0;
    double on_time_rate = 0.0;
    double max_delay = 0.0;
    double mean_delay = 0.0;  // over delayed orders
    double std_delay = 0.0;   // over delayed orders
    double mean_delay_all = 0.0;
    double std_delay_all = 0.0;
    std::size_t n = 0;
    std::size_t n_delayed = 0;
};

inline DelayStats summary_stats(const std::vector<double>& delays) {
    if (delays.empty()) throw Error("summary_stats: empty vector");
    DelayStats s;
    s.n = delays.size();
    std::vector<double> delayed;
    for (double d : delays) {
        if (d > 0.0) delayed.push_back(d);
    }
    s.n_delayed = delayed.size();
    s.delayed_rate = static_cast<double>(delayed.size()) / static_cast<double>(delays.size());
    s.on_time_rate = 1.0 - s.delayed_rate;
    s.mean_delay_all = mean(delays);
    s.std_delay_all = std::sqrt(sample_variance(delays));
    if (!delayed.empty()) {
        s.max_delay = *std::max_element(delayed.begin(), delayed.end());
        s.mean_delay = mean(delayed);
        s.std_delay = std::sqrt(sample_variance(delayed));
    }
    return s;
}

}  // namespace causalkit
