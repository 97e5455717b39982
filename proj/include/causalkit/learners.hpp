#pragma once

// Gradient-boosted depth-limited regression trees, trained with exact greedy
// level-wise split search over presorted feature indices. Two losses: squared
// error (regressor) and logistic (probability classifier). Everything is
// deterministic given (data, hyperparameters, seed).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "causalkit/common.hpp"
#include "causalkit/design.hpp"

namespace causalkit {

struct Hyperparams {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_leaf = 20;
    double subsample = 1.0;

    void validate() const {
        if (n_trees < 1) throw UsageError("hyperparams: n_trees must be positive");
        if (max_depth < 1) throw UsageError("hyperparams: max_depth must be positive");
        if (!(learning_rate > 0.0) || learning_rate > 1.0) {
            throw UsageError("hyperparams: learning_rate must be in (0, 1]");
        }
        if (min_leaf < 1) throw UsageError("hyperparams: min_leaf must be positive");
        if (!(subsample > 0.0) || subsample > 1.0) {
            throw UsageError("hyperparams: subsample must be in (0, 1]");
        }
    }

    std::string describe() const {
        return strfmt("trees=%d depth=%d lr=%g min_leaf=%d subsample=%g", n_trees, max_depth,
                      learning_rate, min_leaf, subsample);
    }
};

// The default tuning grid used when a caller does not supply one.
inline std::vector<Hyperparams> default_grid() {
    std::vector<Hyperparams> grid;
    for (int depth : {2, 3, 4}) {
        for (int trees : {100, 300}) {
            for (double lr : {0.05, 0.1}) {
                grid.push_back(Hyperparams{trees, depth, lr, 20, 1.0});
            }
        }
    }
    return grid;
}

enum class ModelKind { Regressor, Classifier };

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf contribution, learning rate already applied

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict_row(const Eigen::MatrixXd& X, Eigen::Index row) const {
        int node = 0;
        while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
            node = X(row, nd.feature) < nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(node)].value;
    }
};

namespace detail {

constexpr double kLeafPenalty = 1.0;  // L2 penalty on leaf weights
constexpr double kMinGain = 1e-12;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Level-wise exact greedy tree construction on second-order gradients.
// `sorted` holds, per feature, all training-row indices ordered by feature
// value (ties by row index); rows outside the subsample carry node id -1.
class TreeBuilder {
  public:
    TreeBuilder(const Eigen::MatrixXd& X, const std::vector<std::vector<int>>& sorted,
                int max_depth, int min_leaf)
        : X_(X), sorted_(sorted), max_depth_(max_depth), min_leaf_(min_leaf) {}

    Tree build(const Eigen::VectorXd& grad, const Eigen::VectorXd& hess,
               const std::vector<int>& sample_rows, double learning_rate) {
        Tree tree;
        node_of_.assign(static_cast<std::size_t>(X_.rows()), -1);

        double g_root = 0.0;
        double h_root = 0.0;
        for (int r : sample_rows) {
            node_of_[static_cast<std::size_t>(r)] = 0;
            g_root += grad[r];
            h_root += hess[r];
        }
        tree.nodes.push_back(TreeNode{});
        std::vector<NodeStats> level = {
            NodeStats{0, g_root, h_root, static_cast<int>(sample_rows.size())}};

        for (int depth = 0; depth < max_depth_ && !level.empty(); ++depth) {
            level = split_level(&tree, level, grad, hess, learning_rate);
        }
        // nodes still open at max depth become leaves
        for (const NodeStats& ns : level) finalize_leaf(&tree, ns, learning_rate);
        return tree;
    }

  private:
    struct NodeStats {
        int id = 0;
        double g = 0.0;
        double h = 0.0;
        int count = 0;
    };

    struct Candidate {
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
    };

    struct ScanState {
        double g_acc = 0.0;
        double h_acc = 0.0;
        int cnt_acc = 0;
        double last = 0.0;
        bool seen = false;
    };

    static double leaf_objective(double g, double h) {
        return g * g / (h + kLeafPenalty);
    }

    void finalize_leaf(Tree* tree, const NodeStats& ns, double learning_rate) const {
        TreeNode& nd = tree->nodes[static_cast<std::size_t>(ns.id)];
        nd.feature = -1;
        nd.value = learning_rate * (-ns.g / (ns.h + kLeafPenalty));
    }

    std::vector<NodeStats> split_level(Tree* tree, const std::vector<NodeStats>& level,
                                       const Eigen::VectorXd& grad, const Eigen::VectorXd& hess,
                                       double learning_rate) {
        // slot index per node id at this level; -1 means not at this level
        slot_of_.assign(tree->nodes.size(), -1);
        std::vector<Candidate> best(level.size());
        std::vector<char> splittable(level.size(), 0);
        for (std::size_t s = 0; s < level.size(); ++s) {
            slot_of_[static_cast<std::size_t>(level[s].id)] = static_cast<int>(s);
            splittable[s] = level[s].count >= 2 * min_leaf_ ? 1 : 0;
        }

        std::vector<ScanState> state(level.size());
        for (int f = 0; f < static_cast<int>(X_.cols()); ++f) {
            std::fill(state.begin(), state.end(), ScanState{});
            for (int row : sorted_[static_cast<std::size_t>(f)]) {
                const int node = node_of_[static_cast<std::size_t>(row)];
                if (node < 0) continue;
                const int s = slot_of_[static_cast<std::size_t>(node)];
                if (s < 0 || !splittable[static_cast<std::size_t>(s)]) continue;
                ScanState& st = state[static_cast<std::size_t>(s)];
                const double v = X_(row, f);
                if (st.seen && v > st.last && st.cnt_acc >= min_leaf_ &&
                    level[static_cast<std::size_t>(s)].count - st.cnt_acc >= min_leaf_) {
                    const NodeStats& ns = level[static_cast<std::size_t>(s)];
                    const double gain = 0.5 * (leaf_objective(st.g_acc, st.h_acc) +
                                               leaf_objective(ns.g - st.g_acc, ns.h - st.h_acc) -
                                               leaf_objective(ns.g, ns.h));
                    Candidate& b = best[static_cast<std::size_t>(s)];
                    // strict improvement keeps the first (lowest feature index,
                    // lowest threshold) winner on ties — determinism
                    if (gain > b.gain + kMinGain || (b.feature < 0 && gain > kMinGain)) {
                        b.gain = gain;
                        b.feature = f;
                        b.threshold = st.last + 0.5 * (v - st.last);
                    }
                }
                st.g_acc += grad[row];
                st.h_acc += hess[row];
                st.cnt_acc += 1;
                st.last = v;
                st.seen = true;
            }
        }

        // materialize children; re-derive child stats from the rule so the
        // tree is self-consistent even under floating-point edge thresholds
        std::vector<NodeStats> next;
        for (std::size_t s = 0; s < level.size(); ++s) {
            const Candidate& b = best[s];
            if (b.feature < 0) {
                finalize_leaf(tree, level[s], learning_rate);
                continue;
            }
            const int left = static_cast<int>(tree->nodes.size());
            const int right = left + 1;
            {
                // complete all writes before push_back invalidates the reference
                TreeNode& nd = tree->nodes[static_cast<std::size_t>(level[s].id)];
                nd.feature = b.feature;
                nd.threshold = b.threshold;
                nd.left = left;
                nd.right = right;
            }
            tree->nodes.push_back(TreeNode{});
            tree->nodes.push_back(TreeNode{});
            next.push_back(NodeStats{left, 0.0, 0.0, 0});
            next.push_back(NodeStats{right, 0.0, 0.0, 0});
        }
        if (next.empty()) {
            // every node at this level became a leaf
            return {};
        }

        slot_of_.assign(tree->nodes.size(), -1);
        for (std::size_t s = 0; s < next.size(); ++s) {
            slot_of_[static_cast<std::size_t>(next[s].id)] = static_cast<int>(s);
        }
        for (std::size_t r = 0; r < node_of_.size(); ++r) {
            const int node = node_of_[r];
            if (node < 0) continue;
            const TreeNode& nd = tree->nodes[static_cast<std::size_t>(node)];
            if (nd.is_leaf()) {
                node_of_[r] = -2 - node;  // finished rows: park below -1
                continue;
            }
            const int child =
                X_(static_cast<Eigen::Index>(r), nd.feature) < nd.threshold ? nd.left : nd.right;
            node_of_[r] = child;
            NodeStats& cs = next[static_cast<std::size_t>(slot_of_[static_cast<std::size_t>(child)])];
            cs.g += grad[static_cast<Eigen::Index>(r)];
            cs.h += hess[static_cast<Eigen::Index>(r)];
            cs.count += 1;
        }
        return next;
    }

    const Eigen::MatrixXd& X_;
    const std::vector<std::vector<int>>& sorted_;
    int max_depth_;
    int min_leaf_;
    std::vector<int> node_of_;
    std::vector<int> slot_of_;
};

inline std::vector<std::vector<int>> presort_features(const Eigen::MatrixXd& X) {
    const auto n = static_cast<int>(X.rows());
    std::vector<std::vector<int>> sorted(static_cast<std::size_t>(X.cols()));
    for (int f = 0; f < static_cast<int>(X.cols()); ++f) {
        auto& idx = sorted[static_cast<std::size_t>(f)];
        idx.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            const double va = X(a, f);
            const double vb = X(b, f);
            return va < vb || (va == vb && a < b);
        });
    }
    return sorted;
}

}  // namespace detail

class Gbm {
  public:
    ModelKind kind = ModelKind::Regressor;
    int feature_count = 0;
    double base_score = 0.0;
    Hyperparams hp;
    std::vector<Tree> trees;
    std::vector<double> train_loss;  // per boosting round, on the full fit data

    static constexpr double kProbClip = 1e-3;

    Eigen::VectorXd raw_scores(const Eigen::MatrixXd& X) const {
        if (X.cols() != feature_count) {
            throw Error(strfmt("predict: expected %d features, got %d", feature_count,
                               static_cast<int>(X.cols())));
        }
        Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), base_score);
        for (const Tree& t : trees) {
            for (Eigen::Index r = 0; r < X.rows(); ++r) out[r] += t.predict_row(X, r);
        }
        return out;
    }

    // Regressor: conditional-mean predictions. Classifier: probabilities in
    // [kProbClip, 1 - kProbClip].
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
        Eigen::VectorXd out = raw_scores(X);
        if (kind == ModelKind::Classifier) {
            for (Eigen::Index r = 0; r < out.size(); ++r) {
                out[r] = std::clamp(detail::sigmoid(out[r]), kProbClip, 1.0 - kProbClip);
            }
        }
        return out;
    }

    Eigen::VectorXd predict(const DesignMatrix& X) const { return predict(X.values); }

    // Versioned plain-text form: header, then one line per node.
    std::string serialize() const {
        std::ostringstream out;
        out << "gbm v1\n";
        out << "kind " << (kind == ModelKind::Regressor ? "regressor" : "classifier") << '\n';
        out << "features " << feature_count << '\n';
        out << "base " << format_double(base_score) << '\n';
        out << "trees " << trees.size() << '\n';
        for (const Tree& t : trees) {
            out << "tree " << t.nodes.size() << '\n';
            for (const TreeNode& nd : t.nodes) {
                out << nd.feature << ' ' << format_double(nd.threshold) << ' ' << nd.left << ' '
                    << nd.right << ' ' << format_double(nd.value) << '\n';
            }
        }
        return out.str();
    }

    static Gbm deserialize(const std::string& text) {
        std::istringstream in(text);
        std::string word;
        std::string version;
        in >> word >> version;
        if (word != "gbm" || version != "v1") throw Error("model parse: unknown format header");
        Gbm model;
        std::size_t n_trees = 0;
        while (in >> word) {
            if (word == "kind") {
                std::string k;
                in >> k;
                if (k == "regressor") {
                    model.kind = ModelKind::Regressor;
                } else if (k == "classifier") {
                    model.kind = ModelKind::Classifier;
                } else {
                    throw Error("model parse: unknown kind '" + k + "'");
                }
            } else if (word == "features") {
                in >> model.feature_count;
            } else if (word == "base") {
                in >> model.base_score;
            } else if (word == "trees") {
                in >> n_trees;
            } else if (word == "tree") {
                std::size_t n_nodes = 0;
                in >> n_nodes;
                Tree t;
                t.nodes.resize(n_nodes);
                for (auto& nd : t.nodes) {
                    in >> nd.feature >> nd.threshold >> nd.left >> nd.right >> nd.value;
                }
                model.trees.push_back(std::move(t));
            } else {
                throw Error("model parse: unexpected token '" + word + "'");
            }
        }
        if (in.bad() || model.trees.size() != n_trees) {
            throw Error("model parse: truncated input");
        }
        return model;
    }
};

namespace detail {

inline Gbm fit_boosted(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ModelKind kind,
                       const Hyperparams& hp, std::uint64_t seed) {
    hp.validate();
    const auto n = static_cast<int>(X.rows());
    if (n == 0) throw Error("fit: empty design matrix");
    if (X.rows() != y.size()) throw Error("fit: row count mismatch");
    if (n < 2 * hp.min_leaf) {
        throw Error(strfmt("fit: need at least %d rows for min_leaf=%d, got %d", 2 * hp.min_leaf,
                           hp.min_leaf, n));
    }
    if (!y.allFinite() || !X.allFinite()) throw Error("fit: non-finite input");

    Gbm model;
    model.kind = kind;
    model.feature_count = static_cast<int>(X.cols());
    model.hp = hp;

    if (kind == ModelKind::Classifier) {
        double p1 = 0.0;
        for (int i = 0; i < n; ++i) {
            if (y[i] != 0.0 && y[i] != 1.0) throw Error("fit_classifier: labels must be 0/1");
            p1 += y[i];
        }
        p1 /= n;
        if (p1 == 0.0 || p1 == 1.0) {
            throw Error("fit_classifier: single-class labels (propensity undefined)");
        }
        model.base_score = std::log(p1 / (1.0 - p1));
    } else {
        model.base_score = y.mean();
    }

    const std::vector<std::vector<int>> sorted = presort_features(X);
    TreeBuilder builder(X, sorted, hp.max_depth, hp.min_leaf);
    Rng rng(seed);

    Eigen::VectorXd score = Eigen::VectorXd::Constant(n, model.base_score);
    Eigen::VectorXd grad(n);
    Eigen::VectorXd hess(n);
    std::vector<int> all_rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all_rows[static_cast<std::size_t>(i)] = i;

    const int n_sample =
        std::max(2 * hp.min_leaf, static_cast<int>(std::floor(hp.subsample * n)));

    for (int round = 0; round < hp.n_trees; ++round) {
        if (kind == ModelKind::Regressor) {
            grad = score - y;
            hess.setOnes();
        } else {
            for (int i = 0; i < n; ++i) {
                const double p = sigmoid(score[i]);
                grad[i] = p - y[i];
                hess[i] = std::max(p * (1.0 - p), 1e-12);
            }
        }

        std::vector<int> sample_rows;
        if (n_sample >= n) {
            sample_rows = all_rows;
        } else {
            Rng tree_rng = rng.fork(static_cast<std::uint64_t>(round));
            std::vector<int> pool = all_rows;
            // partial Fisher–Yates: first n_sample entries are the sample
            for (int i = 0; i < n_sample; ++i) {
                const auto j = i + static_cast<int>(tree_rng.uniform_int(
                                       static_cast<std::uint64_t>(n - i)));
                std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
            }
            pool.resize(static_cast<std::size_t>(n_sample));
            std::sort(pool.begin(), pool.end());
            sample_rows = std::move(pool);
        }

        Tree tree = builder.build(grad, hess, sample_rows, hp.learning_rate);
        for (int i = 0; i < n; ++i) {
            score[i] += tree.predict_row(X, i);
        }
        model.trees.push_back(std::move(tree));

        double loss = 0.0;
        if (kind == ModelKind::Regressor) {
            loss = (score - y).squaredNorm() / n;
        } else {
            for (int i = 0; i < n; ++i) {
                const double p = std::clamp(sigmoid(score[i]), 1e-12, 1.0 - 1e-12);
                loss -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
            }
            loss /= n;
        }
        model.train_loss.push_back(loss);
    }
    return model;
}

}  // namespace detail

inline Gbm fit_regressor(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Hyperparams& hp,
                         std::uint64_t seed) {
    return detail::fit_boosted(X, y, ModelKind::Regressor, hp, seed);
}

inline Gbm fit_regressor(const DesignMatrix& X, const Eigen::VectorXd& y, const Hyperparams& hp,
                         std::uint64_t seed) {
    return fit_regressor(X.values, y, hp, seed);
}

inline Gbm fit_classifier(const Eigen::MatrixXd& X, const Eigen::VectorXd& d, const Hyperparams& hp,
                          std::uint64_t seed) {
    return detail::fit_boosted(X, d, ModelKind::Classifier, hp, seed);
}

inline Gbm fit_classifier(const DesignMatrix& X, const Eigen::VectorXd& d, const Hyperparams& hp,
                          std::uint64_t seed) {
    return fit_classifier(X.values, d, hp, seed);
}

}  // namespace causalkit
