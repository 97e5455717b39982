#pragma once

// Constraint-based discovery: the PC algorithm with the Fisher z-test of
// vanishing partial correlation. Edge removals are committed between
// conditioning-size sweeps in deterministic pair order, collider orientation
// resolves conflicts to undirected edges, and the two standard orientation
// propagation rules run to a fixed point.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causalkit/common.hpp"
#include "causalkit/graph.hpp"
#include "causalkit/table.hpp"

namespace causalkit {

// One column per original variable (categoricals integer-coded), the
// pre-encoding view used for linear-Gaussian independence testing.
struct VariableMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // n_rows x n_variables
};

inline VariableMatrix variable_matrix(const DataTable& table) {
    VariableMatrix vm;
    std::vector<const Column*> cols;
    for (const auto& col : table.columns()) {
        if (col.spec.role == Role::Ignored) continue;
        if (col.spec.kind == ColumnKind::Date) {
            throw Error("variable_matrix: date column '" + col.spec.name +
                        "' must be converted (calendar quarter) first");
        }
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            if (col.missing[r]) {
                throw Error("variable_matrix: column '" + col.spec.name +
                            "' has missing values; clean the table first");
            }
        }
        cols.push_back(&col);
        vm.names.push_back(col.spec.name);
    }
    vm.values.resize(static_cast<Eigen::Index>(table.n_rows()),
                     static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const Column& col = *cols[c];
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            double v = 0.0;
            switch (col.spec.kind) {
                case ColumnKind::Numeric:
                    v = col.numeric()[r];
                    break;
                case ColumnKind::Binary:
                    v = col.binary()[r];
                    break;
                case ColumnKind::Categorical:
                    v = col.categorical().codes[r];
                    break;
                case ColumnKind::Date:
                    break;  // unreachable
            }
            vm.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return vm;
}

inline Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n < 2) throw Error("correlation_matrix: need at least two rows");
    Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
    Eigen::VectorXd sd(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        sd[j] = centered.col(j).norm();
        if (!(sd[j] > 0.0)) {
            throw Error(strfmt("correlation_matrix: column %d is constant", static_cast<int>(j)));
        }
    }
    Eigen::MatrixXd corr(p, p);
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = 0; b < p; ++b) {
            corr(a, b) = centered.col(a).dot(centered.col(b)) / (sd[a] * sd[b]);
        }
    }
    return corr;
}

// Partial correlation of i and j given S, from the precision matrix of the
// correlation submatrix over {i, j} union S.
inline double partial_correlation(const Eigen::MatrixXd& corr, int i, int j,
                                  const std::vector<int>& S) {
    if (S.empty()) return corr(i, j);
    std::vector<int> idx = {i, j};
    idx.insert(idx.end(), S.begin(), S.end());
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            sub(a, b) = corr(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (!lu.isInvertible()) throw Error("partial_correlation: singular correlation submatrix");
    const Eigen::MatrixXd prec = lu.inverse();
    const double denom = prec(0, 0) * prec(1, 1);
    if (!(denom > 0.0)) throw Error("partial_correlation: invalid precision diagonal");
    return -prec(0, 1) / std::sqrt(denom);
}

struct FisherZResult {
    double statistic = 0.0;
    double partial_corr = 0.0;
    bool independent = false;
};

// z = arctanh(r) * sqrt(n - |S| - 3); independent iff |z| <= Phi^-1(1 - alpha/2).
inline FisherZResult fisher_z_test(int i, int j, const std::vector<int>& S,
                                   const Eigen::MatrixXd& corr, std::size_t n, double alpha) {
    if (n <= S.size() + 3) throw Error("fisher_z_test: need n > |S| + 3");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw UsageError("fisher_z_test: alpha must be in (0,1)");

    FisherZResult result;
    const double r = partial_correlation(corr, i, j, S);
    result.partial_corr = r;
    if (std::abs(r) >= 1.0) {
        result.statistic = std::numeric_limits<double>::infinity();
        result.independent = false;
        return result;
    }
    const double scale = std::sqrt(static_cast<double>(n - S.size() - 3));
    result.statistic = 0.5 * std::log((1.0 + r) / (1.0 - r)) * scale;
    const double crit = normal_quantile(1.0 - alpha / 2.0);
    result.independent = std::abs(result.statistic) <= crit;
    return result;
}

// ---------------------------------------------------------------------------
// Skeleton discovery
// ---------------------------------------------------------------------------

class SepSets {
  public:
    void record(int i, int j, std::vector<int> S) {
        sets_.emplace(key(i, j), std::move(S));  // first separator wins
    }
    bool has(int i, int j) const { return sets_.count(key(i, j)) > 0; }
    const std::vector<int>& get(int i, int j) const {
        const auto it = sets_.find(key(i, j));
        if (it == sets_.end()) throw Error("sepsets: no entry for pair");
        return it->second;
    }
    bool contains(int i, int j, int k) const {
        const auto it = sets_.find(key(i, j));
        if (it == sets_.end()) return false;
        return std::find(it->second.begin(), it->second.end(), k) != it->second.end();
    }
    std::size_t size() const { return sets_.size(); }

  private:
    static std::pair<int, int> key(int i, int j) { return {std::min(i, j), std::max(i, j)}; }
    std::map<std::pair<int, int>, std::vector<int>> sets_;
};

struct IndependenceTestRecord {
    int i = 0;
    int j = 0;
    std::vector<int> S;
    double statistic = 0.0;
    bool independent = false;
};

struct Skeleton {
    std::vector<std::string> names;
    std::vector<std::vector<char>> adj;  // symmetric
    SepSets sepsets;
    std::vector<IndependenceTestRecord> trace;

    bool adjacent(int i, int j) const {
        return adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0;
    }
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (std::size_t i = 0; i < adj.size(); ++i) {
            for (std::size_t j = i + 1; j < adj.size(); ++j) {
                if (adj[i][j]) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
        return out;
    }
};

namespace detail {

// lexicographic subsets of `pool` of size `size`, invoking fn(subset);
// fn returns true to stop early
template <typename Fn>
inline bool for_each_subset(const std::vector<int>& pool, std::size_t size, Fn&& fn) {
    if (size > pool.size()) return false;
    std::vector<std::size_t> pick(size);
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    std::vector<int> subset(size);
    while (true) {
        for (std::size_t i = 0; i < size; ++i) subset[i] = pool[pick[i]];
        if (fn(subset)) return true;
        // advance combination
        std::size_t i = size;
        while (i > 0) {
            --i;
            if (pick[i] + (size - i) < pool.size()) {
                ++pick[i];
                for (std::size_t k = i + 1; k < size; ++k) pick[k] = pick[k - 1] + 1;
                break;
            }
            if (i == 0) return false;
        }
        if (size == 0) return false;
    }
}

}  // namespace detail

// Stable sweep variant: within one conditioning-size level every pair is
// tested against the level-start adjacencies; removals commit at level end.
inline Skeleton pc_skeleton(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                            double alpha = 0.01, std::size_t max_cond_size = 3) {
    const auto p = static_cast<int>(X.cols());
    const auto n = static_cast<std::size_t>(X.rows());
    if (static_cast<std::size_t>(p) != names.size()) throw Error("pc_skeleton: name count mismatch");
    if (n <= static_cast<std::size_t>(p) + 3) throw Error("pc_skeleton: need n > variables + 3");

    const Eigen::MatrixXd corr = correlation_matrix(X);

    Skeleton sk;
    sk.names = names;
    sk.adj.assign(static_cast<std::size_t>(p), std::vector<char>(static_cast<std::size_t>(p), 1));
    for (int i = 0; i < p; ++i) sk.adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;

    for (std::size_t level = 0; level <= max_cond_size; ++level) {
        // freeze adjacencies for this sweep
        const std::vector<std::vector<char>> frozen = sk.adj;
        const auto frozen_neighbors = [&](int node, int excluded) {
            std::vector<int> out;
            for (int v = 0; v < p; ++v) {
                if (v != excluded && frozen[static_cast<std::size_t>(node)][static_cast<std::size_t>(v)]) {
                    out.push_back(v);
                }
            }
            return out;
        };

        bool any_candidate = false;
        std::vector<std::pair<int, int>> to_remove;
        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p; ++j) {
                if (!frozen[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
                bool removed = false;
                for (const int side : {i, j}) {
                    const std::vector<int> pool = frozen_neighbors(side, side == i ? j : i);
                    if (pool.size() < level) continue;
                    any_candidate = true;
                    detail::for_each_subset(pool, level, [&](const std::vector<int>& S) {
                        const FisherZResult res = fisher_z_test(i, j, S, corr, n, alpha);
                        sk.trace.push_back(
                            IndependenceTestRecord{i, j, S, res.statistic, res.independent});
                        if (res.independent) {
                            to_remove.emplace_back(i, j);
                            sk.sepsets.record(i, j, S);
                            removed = true;
                        }
                        return removed;
                    });
                    if (removed) break;
                }
            }
        }
        for (const auto& [i, j] : to_remove) {
            sk.adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 0;
            sk.adj[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 0;
        }
        if (!any_candidate && level > 0) break;  // no adjacency large enough to test
    }
    return sk;
}

inline Skeleton pc_skeleton(const VariableMatrix& vm, double alpha = 0.01,
                            std::size_t max_cond_size = 3) {
    return pc_skeleton(vm.values, vm.names, alpha, max_cond_size);
}

// ---------------------------------------------------------------------------
// Orientation
// ---------------------------------------------------------------------------

struct OrientationResult {
    Pdag pdag;
    std::vector<std::string> conflicts;  // human-readable conflict log
};

// For every unshielded triple i - k - j with k outside the recorded separator
// of (i, j), claim i -> k <- j. Contradictory claims cancel to undirected.
inline OrientationResult orient_v_structures(const Skeleton& sk) {
    const int p = static_cast<int>(sk.names.size());
    OrientationResult result;
    result.pdag = Pdag(sk.names);
    for (const auto& [i, j] : sk.edges()) {
        result.pdag.add_undirected(i, j);
    }

    // collect claims first; a claim is an orientation a -> b
    std::set<std::pair<int, int>> claims;
    for (int k = 0; k < p; ++k) {
        for (int i = 0; i < p; ++i) {
            if (i == k || !sk.adjacent(i, k)) continue;
            for (int j = i + 1; j < p; ++j) {
                if (j == k || !sk.adjacent(j, k) || sk.adjacent(i, j)) continue;
                if (!sk.sepsets.has(i, j)) continue;
                if (!sk.sepsets.contains(i, j, k)) {
                    claims.insert({i, k});
                    claims.insert({j, k});
                }
            }
        }
    }

    for (const auto& [a, b] : claims) {
        if (claims.count({b, a})) {
            if (a < b) {
                result.conflicts.push_back("conflicting collider orientations for " +
                                           sk.names[static_cast<std::size_t>(a)] + " - " +
                                           sk.names[static_cast<std::size_t>(b)] +
                                           "; left undirected");
            }
            continue;
        }
        if (result.pdag.has_undirected(a, b)) {
            result.pdag.orient(a, b);
        }
    }
    return result;
}

// Orientation propagation to a fixed point:
//   rule 1: a -> b and b - c with a, c non-adjacent  =>  b -> c
//   rule 2: a - b and a -> k -> b                    =>  a -> b
inline Pdag apply_orientation_rules(Pdag pdag) {
    const int p = static_cast<int>(pdag.n_nodes());
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < p; ++a) {
            for (int b = 0; b < p; ++b) {
                if (a == b) continue;
                if (pdag.has_directed(a, b)) {
                    for (int c = 0; c < p; ++c) {
                        if (c == a || c == b) continue;
                        if (pdag.has_undirected(b, c) && !pdag.adjacent(a, c)) {
                            pdag.orient(b, c);
                            changed = true;
                        }
                    }
                } else if (pdag.has_undirected(a, b)) {
                    for (int k = 0; k < p; ++k) {
                        if (k == a || k == b) continue;
                        if (pdag.has_directed(a, k) && pdag.has_directed(k, b)) {
                            pdag.orient(a, b);
                            changed = true;
                            break;
                        }
                    }
                }
            }
        }
    }
    return pdag;
}

// Full constraint-based pipeline.
struct PcResult {
    Skeleton skeleton;
    Pdag pdag;
    std::vector<std::string> conflicts;
};

inline PcResult pc_discover(const VariableMatrix& vm, double alpha = 0.01,
                            std::size_t max_cond_size = 3) {
    PcResult result;
    result.skeleton = pc_skeleton(vm, alpha, max_cond_size);
    OrientationResult oriented = orient_v_structures(result.skeleton);
    result.conflicts = std::move(oriented.conflicts);
    result.pdag = apply_orientation_rules(std::move(oriented.pdag));
    return result;
}

}  // namespace causalkit
