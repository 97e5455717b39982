#pragma once

// Policy learning: exact search over shallow axis-aligned decision trees
// maximizing the empirical policy value sum((2*pi(X_i) - 1) * psi_b_i).
// Candidate thresholds are midpoints of consecutive distinct feature values;
// leaves assign treatment 1 exactly when their score sum is positive.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "causalkit/common.hpp"
#include "causalkit/design.hpp"
#include "causalkit/dml.hpp"

namespace causalkit {

struct PolicyNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int assign = 0;  // leaf treatment assignment

    bool is_leaf() const { return feature < 0; }
};

struct PolicyTree {
    std::vector<PolicyNode> nodes;
    int max_depth = 2;
    int feature_count = 0;
};

struct WeightedTargets {
    std::vector<double> weights;  // |psi_b|
    std::vector<int> labels;      // 1 if psi_b > 0 else 0
};

struct PolicyValue {
    double value = 0.0;
    std::size_t n = 0;
};

inline WeightedTargets weighted_targets(const OrthoScores& scores) {
    WeightedTargets wt;
    const Eigen::Index n = scores.psi_b.size();
    wt.weights.reserve(static_cast<std::size_t>(n));
    wt.labels.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = scores.psi_b[i];
        if (!std::isfinite(v)) throw Error("weighted_targets: non-finite score");
        wt.weights.push_back(std::abs(v));
        wt.labels.push_back(v > 0.0 ? 1 : 0);
    }
    return wt;
}

inline int predict_policy(const PolicyTree& tree, const Eigen::RowVectorXd& x) {
    if (static_cast<int>(x.size()) != tree.feature_count) {
        throw Error(strfmt("predict_policy: expected %d features, got %d", tree.feature_count,
                           static_cast<int>(x.size())));
    }
    int node = 0;
    while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const PolicyNode& nd = tree.nodes[static_cast<std::size_t>(node)];
        node = x[nd.feature] < nd.threshold ? nd.left : nd.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].assign;
}

inline PolicyValue evaluate_policy(const PolicyTree& tree, const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& psi_b) {
    if (X.rows() != psi_b.size()) throw Error("evaluate_policy: length mismatch");
    PolicyValue pv;
    pv.n = static_cast<std::size_t>(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int a = predict_policy(tree, X.row(i));
        pv.value += (2.0 * a - 1.0) * psi_b[i];
    }
    return pv;
}

namespace detail {

// A solved subtree: nodes[0] is its root; child indices are local.
struct SolvedSubtree {
    double value = 0.0;
    std::vector<PolicyNode> nodes;
};

inline SolvedSubtree leaf_solution(double subset_sum) {
    SolvedSubtree s;
    s.value = std::abs(subset_sum);
    PolicyNode leaf;
    leaf.assign = subset_sum > 0.0 ? 1 : 0;
    s.nodes.push_back(leaf);
    return s;
}

inline SolvedSubtree merge_split(int feature, double threshold, const SolvedSubtree& left,
                                 const SolvedSubtree& right) {
    SolvedSubtree s;
    s.value = left.value + right.value;
    PolicyNode root;
    root.feature = feature;
    root.threshold = threshold;
    root.left = 1;
    root.right = 1 + static_cast<int>(left.nodes.size());
    s.nodes.push_back(root);
    for (PolicyNode nd : left.nodes) {
        if (!nd.is_leaf()) {
            nd.left += 1;
            nd.right += 1;
        }
        s.nodes.push_back(nd);
    }
    const int offset = root.right;
    for (PolicyNode nd : right.nodes) {
        if (!nd.is_leaf()) {
            nd.left += offset;
            nd.right += offset;
        }
        s.nodes.push_back(nd);
    }
    return s;
}

// Exact best subtree of depth <= `depth` over the masked row subset.
// depth 1 is a single sorted scan per feature; deeper levels enumerate every
// (feature, midpoint-threshold) root candidate and recurse on the partition.
// Scanned in ascending (feature, threshold) order; a split must beat the
// incumbent by `tie_tol` (rounding noise at the caller's score scale), so
// near-ties keep the simplest earliest candidate instead of growing spurious
// structure out of partial-sum reassociation.
inline SolvedSubtree solve_subtree(const Eigen::MatrixXd& X, const Eigen::VectorXd& psi,
                                   const std::vector<std::vector<int>>& sorted,
                                   const std::vector<char>& in_subset, double subset_sum,
                                   int depth, double tie_tol) {
    SolvedSubtree best = leaf_solution(subset_sum);
    if (depth == 0) return best;

    const auto p = static_cast<int>(X.cols());
    const auto n = static_cast<std::size_t>(X.rows());

    if (depth == 1) {
        for (int f = 0; f < p; ++f) {
            double prefix = 0.0;
            double last = 0.0;
            bool seen = false;
            for (int row : sorted[static_cast<std::size_t>(f)]) {
                if (!in_subset[static_cast<std::size_t>(row)]) continue;
                const double v = X(row, f);
                if (seen && v > last) {
                    const double rest = subset_sum - prefix;
                    const double value = std::abs(prefix) + std::abs(rest);
                    if (value > best.value + tie_tol) {
                        best = merge_split(f, last + 0.5 * (v - last), leaf_solution(prefix),
                                           leaf_solution(rest));
                    }
                }
                prefix += psi[row];
                last = v;
                seen = true;
            }
        }
        return best;
    }

    std::vector<char> left_mask(n, 0);
    std::vector<char> right_mask(n, 0);
    for (int f = 0; f < p; ++f) {
        const auto& order = sorted[static_cast<std::size_t>(f)];
        std::fill(left_mask.begin(), left_mask.end(), 0);
        double left_sum = 0.0;
        double last = 0.0;
        bool seen = false;
        // collect candidate boundaries while building the left mask
        for (int row : order) {
            if (!in_subset[static_cast<std::size_t>(row)]) continue;
            const double v = X(row, f);
            if (seen && v > last) {
                for (std::size_t r = 0; r < n; ++r) {
                    right_mask[r] = in_subset[r] && !left_mask[r] ? 1 : 0;
                }
                const SolvedSubtree sl =
                    solve_subtree(X, psi, sorted, left_mask, left_sum, depth - 1, tie_tol);
                const SolvedSubtree sr = solve_subtree(X, psi, sorted, right_mask,
                                                       subset_sum - left_sum, depth - 1, tie_tol);
                if (sl.value + sr.value > best.value + tie_tol) {
                    best = merge_split(f, last + 0.5 * (v - last), sl, sr);
                }
            }
            left_mask[static_cast<std::size_t>(row)] = 1;
            left_sum += psi[row];
            last = v;
            seen = true;
        }
    }
    return best;
}

}  // namespace detail

// Exact argmax over axis-aligned trees of depth <= max_depth. Cost grows as
// (features x rows)^max_depth; depth 2 is the intended working point, depth 3
// is exact but only tractable for small inputs.
inline PolicyTree fit_policy_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& psi_b,
                                  int max_depth = 2) {
    if (max_depth < 1 || max_depth > 3) {
        throw UsageError("fit_policy_tree: max_depth must be 1, 2, or 3");
    }
    const auto n = static_cast<std::size_t>(X.rows());
    if (n == 0) throw Error("fit_policy_tree: empty data");
    if (X.rows() != psi_b.size()) throw Error("fit_policy_tree: length mismatch");
    for (Eigen::Index i = 0; i < psi_b.size(); ++i) {
        if (!std::isfinite(psi_b[i])) throw Error("fit_policy_tree: non-finite score");
    }

    const std::vector<std::vector<int>> sorted = detail::presort_features(X);
    const std::vector<char> all(n, 1);
    // improvements below rounding noise must not buy structure
    const double tie_tol = 1e-9 * psi_b.cwiseAbs().sum();
    const detail::SolvedSubtree solved =
        detail::solve_subtree(X, psi_b, sorted, all, psi_b.sum(), max_depth, tie_tol);

    PolicyTree tree;
    tree.max_depth = max_depth;
    tree.feature_count = static_cast<int>(X.cols());
    tree.nodes = solved.nodes;
    return tree;
}

inline PolicyTree fit_policy_tree(const DesignMatrix& X, const OrthoScores& scores,
                                  int max_depth = 2) {
    return fit_policy_tree(X.values, scores.psi_b, max_depth);
}

// ---------------------------------------------------------------------------
// Renderings
// ---------------------------------------------------------------------------

inline std::string policy_to_text(const PolicyTree& tree,
                                  const std::vector<std::string>& feature_names) {
    std::ostringstream out;
    const auto emit = [&](auto&& self, int id, int indent) -> void {
        const PolicyNode& nd = tree.nodes[static_cast<std::size_t>(id)];
        const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
        if (nd.is_leaf()) {
            out << pad << "assign " << nd.assign << '\n';
            return;
        }
        const std::string& name = feature_names[static_cast<std::size_t>(nd.feature)];
        out << pad << "if " << name << " < " << format_double(nd.threshold) << ":\n";
        self(self, nd.left, indent + 1);
        out << pad << "else:\n";
        self(self, nd.right, indent + 1);
    };
    emit(emit, 0, 0);
    return out.str();
}

inline std::string policy_to_dot(const PolicyTree& tree,
                                 const std::vector<std::string>& feature_names,
                                 const std::string& graph_name = "policy") {
    std::ostringstream out;
    out << "digraph " << graph_name << " {\n";
    out << "  node [shape=box];\n";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const PolicyNode& nd = tree.nodes[i];
        if (nd.is_leaf()) {
            out << "  n" << i << " [label=\"assign " << nd.assign
                << "\", style=filled, fillcolor=\"" << (nd.assign ? "lightblue" : "lightgray")
                << "\"];\n";
        } else {
            out << "  n" << i << " [label=\"" << feature_names[static_cast<std::size_t>(nd.feature)]
                << " < " << format_double(nd.threshold) << "\"];\n";
            out << "  n" << i << " -> n" << nd.left << " [label=\"yes\"];\n";
            out << "  n" << i << " -> n" << nd.right << " [label=\"no\"];\n";
        }
    }
    out << "}\n";
    return out.str();
}

}  // namespace causalkit
