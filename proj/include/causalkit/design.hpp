#pragma once

// DesignMatrix: the numeric view of a cleaned DataTable. Categorical columns
// expand to full one-hot indicator groups (named "Column=Level"), binary
// columns pass through as 0/1, and numeric columns pass through verbatim or
// min-max scaled to [0,1] when listed in the normalization set.

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "causalkit/common.hpp"
#include "causalkit/table.hpp"

namespace causalkit {

struct DesignMatrix {
    Eigen::MatrixXd values;  // n_rows x n_features
    std::vector<std::string> feature_names;
    std::vector<ColumnSpec> source_column;  // originating column, per feature

    std::size_t n_rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t n_features() const { return static_cast<std::size_t>(values.cols()); }

    int feature_index(const std::string& name) const {
        for (std::size_t i = 0; i < feature_names.size(); ++i) {
            if (feature_names[i] == name) return static_cast<int>(i);
        }
        return -1;
    }

    Eigen::VectorXd feature(const std::string& name) const {
        const int idx = feature_index(name);
        if (idx < 0) throw Error("no such feature: '" + name + "'");
        return values.col(idx);
    }

    // All features originating from the named source column.
    std::vector<int> features_from(const std::string& source_name) const {
        std::vector<int> idx;
        for (std::size_t i = 0; i < source_column.size(); ++i) {
            if (source_column[i].name == source_name) idx.push_back(static_cast<int>(i));
        }
        return idx;
    }

    // Covariate-role features minus any feature whose name or source-column
    // name appears in `exclude`. This is how a treatment's own indicator and
    // its sibling one-hot group are kept out of the confounder set.
    std::vector<int> covariate_features(const std::set<std::string>& exclude = {}) const {
        std::vector<int> idx;
        for (std::size_t i = 0; i < feature_names.size(); ++i) {
            if (source_column[i].role != Role::Covariate) continue;
            if (exclude.count(feature_names[i]) || exclude.count(source_column[i].name)) continue;
            idx.push_back(static_cast<int>(i));
        }
        return idx;
    }

    DesignMatrix submatrix(const std::vector<int>& feature_idx) const {
        DesignMatrix out;
        out.values.resize(values.rows(), static_cast<Eigen::Index>(feature_idx.size()));
        out.feature_names.reserve(feature_idx.size());
        out.source_column.reserve(feature_idx.size());
        for (std::size_t j = 0; j < feature_idx.size(); ++j) {
            const int f = feature_idx[j];
            out.values.col(static_cast<Eigen::Index>(j)) = values.col(f);
            out.feature_names.push_back(feature_names[static_cast<std::size_t>(f)]);
            out.source_column.push_back(source_column[static_cast<std::size_t>(f)]);
        }
        return out;
    }

    DesignMatrix select_rows(const std::vector<std::size_t>& rows) const {
        DesignMatrix out;
        out.feature_names = feature_names;
        out.source_column = source_column;
        out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.values.row(static_cast<Eigen::Index>(i)) =
                values.row(static_cast<Eigen::Index>(rows[i]));
        }
        return out;
    }
};

// Encodes every non-ignored column. Date columns must be converted to
// categorical (calendar quarter) before encoding.
inline DesignMatrix encode(const DataTable& table, const std::set<std::string>& normalize = {}) {
    for (const auto& name : normalize) {
        if (!table.has_column(name)) {
            throw UsageError("normalize: no such column '" + name + "'");
        }
        const Column& c = table.column(name);
        if (c.spec.kind != ColumnKind::Numeric) {
            throw UsageError("normalize: column '" + name + "' is not numeric");
        }
    }
    for (const auto& c : table.columns()) {
        if (c.spec.role == Role::Ignored) continue;
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            if (c.missing[r]) throw Error("encode: column '" + c.spec.name + "' has missing values; clean the table first");
        }
    }

    std::size_t n_features = 0;
    for (const auto& c : table.columns()) {
        if (c.spec.role == Role::Ignored) continue;
        switch (c.spec.kind) {
            case ColumnKind::Numeric:
            case ColumnKind::Binary:
                n_features += 1;
                break;
            case ColumnKind::Categorical: {
                const auto& levels = c.categorical().levels;
                if (levels.size() < 2) {
                    throw Error("encode: categorical column '" + c.spec.name +
                                "' has fewer than two levels");
                }
                n_features += levels.size();
                break;
            }
            case ColumnKind::Date:
                throw Error("encode: date column '" + c.spec.name +
                            "' must be converted (calendar quarter) before encoding");
        }
    }

    DesignMatrix dm;
    const auto n = static_cast<Eigen::Index>(table.n_rows());
    dm.values.resize(n, static_cast<Eigen::Index>(n_features));
    dm.feature_names.reserve(n_features);
    dm.source_column.reserve(n_features);

    Eigen::Index j = 0;
    for (const auto& c : table.columns()) {
        if (c.spec.role == Role::Ignored) continue;
        switch (c.spec.kind) {
            case ColumnKind::Numeric: {
                const auto& vals = c.numeric();
                Eigen::VectorXd v(n);
                for (Eigen::Index r = 0; r < n; ++r) v[r] = vals[static_cast<std::size_t>(r)];
                if (normalize.count(c.spec.name)) {
                    const double lo = v.minCoeff();
                    const double hi = v.maxCoeff();
                    if (hi <= lo) {
                        throw Error("normalize: column '" + c.spec.name + "' has zero variance");
                    }
                    v = (v.array() - lo) / (hi - lo);
                }
                dm.values.col(j) = v;
                dm.feature_names.push_back(c.spec.name);
                dm.source_column.push_back(c.spec);
                ++j;
                break;
            }
            case ColumnKind::Binary: {
                const auto& vals = c.binary();
                for (Eigen::Index r = 0; r < n; ++r) {
                    dm.values(r, j) = vals[static_cast<std::size_t>(r)] ? 1.0 : 0.0;
                }
                dm.feature_names.push_back(c.spec.name);
                dm.source_column.push_back(c.spec);
                ++j;
                break;
            }
            case ColumnKind::Categorical: {
                const auto& storage = c.categorical();
                const auto k = static_cast<Eigen::Index>(storage.levels.size());
                dm.values.block(0, j, n, k).setZero();
                for (Eigen::Index r = 0; r < n; ++r) {
                    dm.values(r, j + storage.codes[static_cast<std::size_t>(r)]) = 1.0;
                }
                for (const auto& level : storage.levels) {
                    dm.feature_names.push_back(c.spec.name + "=" + level);
                    dm.source_column.push_back(c.spec);
                }
                j += k;
                break;
            }
            case ColumnKind::Date:
                break;  // unreachable; rejected above
        }
    }
    return dm;
}

}  // namespace causalkit
