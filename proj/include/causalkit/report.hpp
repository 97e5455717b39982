#pragma once

// Rendering of estimation results: the effects table (aligned text and CSV),
// JSON records for machine consumption, and plot-ready curve files. All
// output is deterministic for a fixed input — no timestamps, no locale.

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "causalkit/cate.hpp"
#include "causalkit/csv.hpp"
#include "causalkit/dml.hpp"

#include "json.hpp"

namespace causalkit {

// ===========================================================================
// Effects table
// ===========================================================================

// Column names and order of the results table; fixed report contract.
inline const std::vector<std::string>& ate_table_header() {
    static const std::vector<std::string> header = {"Treatment", "Coef", "t-statistics",
                                                    "P-value", "Std error"};
    return header;
}

namespace detail {

inline std::vector<std::string> ate_table_cells(const AteEstimate& est, const char* fmt) {
    return {est.treatment, strfmt(fmt, est.theta), strfmt(fmt, est.t_statistic),
            strfmt(fmt, est.p_value), strfmt(fmt, est.std_error)};
}

}  // namespace detail

// One row per treatment, full-precision floats, RFC-4180 quoting.
inline std::string ate_results_csv(const std::vector<AteEstimate>& rows) {
    std::ostringstream out;
    const auto& header = ate_table_header();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out << ',';
        out << detail::quote_csv(header[c]);
    }
    out << '\n';
    for (const auto& est : rows) {
        out << detail::quote_csv(est.treatment) << ',' << format_double(est.theta) << ','
            << format_double(est.t_statistic) << ',' << format_double(est.p_value) << ','
            << format_double(est.std_error) << '\n';
    }
    return out.str();
}

// Human-readable alignment: treatment left-aligned, numbers right-aligned.
inline std::string ate_results_text(const std::vector<AteEstimate>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back(ate_table_header());
    for (const auto& est : rows) cells.push_back(detail::ate_table_cells(est, "%.6g"));

    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }

    std::ostringstream out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << "  ";
            const std::size_t pad = width[c] - row[c].size();
            if (c == 0) {
                out << row[c] << std::string(pad, ' ');
            } else {
                out << std::string(pad, ' ') << row[c];
            }
        }
        out << '\n';
    }
    return out.str();
}

// Complete estimate record; the CSV/text table above carries the headline
// subset, this carries everything needed to audit or reproduce the row.
inline nlohmann::json to_json(const AteEstimate& est) {
    return nlohmann::json{{"treatment", est.treatment},
                          {"coef", est.theta},
                          {"std_error", est.std_error},
                          {"t_statistic", est.t_statistic},
                          {"p_value", est.p_value},
                          {"ci_low", est.ci_low},
                          {"ci_high", est.ci_high},
                          {"confidence_level", est.confidence_level},
                          {"n", est.n_used},
                          {"k_folds", est.k_folds},
                          {"n_reps", est.n_reps},
                          {"clamped_count", est.clamped_count}};
}

// ===========================================================================
// Outcome summary
// ===========================================================================

inline nlohmann::json to_json(const DelayStats& stats) {
    return nlohmann::json{{"n", stats.n},
                          {"n_delayed", stats.n_delayed},
                          {"delayed_rate", stats.delayed_rate},
                          {"on_time_rate", stats.on_time_rate},
                          {"max_delay", stats.max_delay},
                          {"mean_delay_delayed", stats.mean_delay},
                          {"std_delay_delayed", stats.std_delay},
                          {"mean_delay_all", stats.mean_delay_all},
                          {"std_delay_all", stats.std_delay_all}};
}

// ===========================================================================
// Curves
// ===========================================================================

// Plot-ready table: one grid point per row with the pointwise band.
inline std::string curve_csv(const CateCurve& curve) {
    std::ostringstream out;
    out << "grid,estimate,band_low,band_high\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        out << format_double(curve.grid[i]) << ',' << format_double(curve.estimate[i]) << ','
            << format_double(curve.band_low[i]) << ',' << format_double(curve.band_high[i])
            << '\n';
    }
    return out.str();
}

// ===========================================================================
// Graph record
// ===========================================================================

// Machine-readable companion to the DOT rendering: node names plus directed
// and undirected edge lists, tagged with the producing algorithm. Extra
// metadata (score, alpha, iterations) is merged in by the caller.
inline nlohmann::json graph_record_json(const std::vector<std::string>& names,
                                        const std::vector<std::pair<int, int>>& directed,
                                        const std::vector<std::pair<int, int>>& undirected,
                                        const std::string& algorithm,
                                        const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json record;
    record["algorithm"] = algorithm;
    record["nodes"] = names;
    auto edge_list = [&](const std::vector<std::pair<int, int>>& edges) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [i, j] : edges) {
            arr.push_back({names[static_cast<std::size_t>(i)], names[static_cast<std::size_t>(j)]});
        }
        return arr;
    };
    record["directed_edges"] = edge_list(directed);
    record["undirected_edges"] = edge_list(undirected);
    for (const auto& [key, value] : extra.items()) record[key] = value;
    return record;
}

// ===========================================================================
// File output
// ===========================================================================

// Binary mode keeps LF line endings on every platform.
inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw Error("failed writing '" + path + "'");
}

inline void write_json_file(const std::string& path, const nlohmann::json& value) {
    write_text_file(path, value.dump(2) + "\n");
}

}  // namespace causalkit
