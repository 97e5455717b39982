// Exact shallow policy trees: weighted targets, depth-limited search,
// evaluation, and renderings.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "causalkit/policy.hpp"

using namespace causalkit;

namespace {

OrthoScores scores_from(std::vector<double> psi) {
    OrthoScores s;
    s.psi_b = Eigen::Map<Eigen::VectorXd>(psi.data(), static_cast<Eigen::Index>(psi.size()));
    s.psi_a = Eigen::VectorXd::Constant(s.psi_b.size(), -1.0);
    return s;
}

// exhaustive depth-1 value: best of a bare leaf and every (feature, midpoint)
double brute_force_depth1(const Eigen::MatrixXd& X, const Eigen::VectorXd& psi) {
    double best = std::abs(psi.sum());
    for (Eigen::Index f = 0; f < X.cols(); ++f) {
        std::vector<double> vals(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) vals[static_cast<std::size_t>(i)] = X(i, f);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t k = 1; k < vals.size(); ++k) {
            const double t = vals[k - 1] + 0.5 * (vals[k] - vals[k - 1]);
            double left = 0.0;
            double right = 0.0;
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                (X(i, f) < t ? left : right) += psi[i];
            }
            best = std::max(best, std::abs(left) + std::abs(right));
        }
    }
    return best;
}

PolicyTree constant_tree(int assign, int feature_count) {
    PolicyTree tree;
    tree.feature_count = feature_count;
    PolicyNode leaf;
    leaf.assign = assign;
    tree.nodes.push_back(leaf);
    return tree;
}

}  // namespace

// ===========================================================================
// Weighted targets
// ===========================================================================

TEST_CASE("scores split into magnitudes and benefit labels", "[policy]") {
    const OrthoScores s = scores_from({3.0, -2.0, 0.0});
    const WeightedTargets wt = weighted_targets(s);
    REQUIRE(wt.weights.size() == 3);
    CHECK(wt.weights[0] == 3.0);
    CHECK(wt.weights[1] == 2.0);
    CHECK(wt.weights[2] == 0.0);
    CHECK(wt.labels[0] == 1);
    CHECK(wt.labels[1] == 0);
    CHECK(wt.labels[2] == 0);  // zero benefit defaults to control

    const double total = wt.weights[0] + wt.weights[1] + wt.weights[2];
    CHECK(total == s.psi_b.cwiseAbs().sum());
}

// ===========================================================================
// Fitting
// ===========================================================================

TEST_CASE("uniformly positive scores collapse to a treat-everyone leaf", "[policy]") {
    Rng rng(81);
    const std::size_t n = 100;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd psi(n);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
        psi[i] = 1.0 + rng.uniform();
    }
    const PolicyTree tree = fit_policy_tree(X, psi, 2);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf());
    CHECK(tree.nodes[0].assign == 1);
    CHECK(evaluate_policy(tree, X, psi).value == Catch::Approx(psi.sum()));
}

TEST_CASE("a sign flip on one binary feature is found at depth one", "[policy]") {
    Rng rng(82);
    const std::size_t n = 300;
    Eigen::MatrixXd X(n, 4);
    Eigen::VectorXd psi(n);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        X(i, 0) = rng.normal();
        X(i, 1) = rng.bernoulli(0.5) ? 1.0 : 0.0;  // the decisive flag
        X(i, 2) = rng.normal();
        X(i, 3) = rng.uniform();
        psi[i] = (X(i, 1) != 0.0 ? 2.0 : -2.0) + 0.3 * rng.normal();
    }
    const PolicyTree tree = fit_policy_tree(X, psi, 1);
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 1);
    CHECK(tree.nodes[0].threshold == Catch::Approx(0.5));
    // below the threshold means flag 0: keep control there, treat above
    CHECK(tree.nodes[static_cast<std::size_t>(tree.nodes[0].left)].assign == 0);
    CHECK(tree.nodes[static_cast<std::size_t>(tree.nodes[0].right)].assign == 1);
}

TEST_CASE("depth-one search matches an exhaustive oracle", "[policy]") {
    Rng rng(83);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 20 + static_cast<std::size_t>(rng.uniform() * 180);
        const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.uniform() * 9);
        Eigen::MatrixXd X(n, p);
        Eigen::VectorXd psi(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            for (Eigen::Index j = 0; j < p; ++j) {
                // mix of continuous and low-cardinality features
                X(i, j) = rng.uniform() < 0.4 ? std::floor(rng.uniform() * 3.0) : rng.normal();
            }
            psi[i] = rng.normal(0.0, 2.0);
        }
        const PolicyTree tree = fit_policy_tree(X, psi, 1);
        const double fitted = evaluate_policy(tree, X, psi).value;
        // margin covers the search's rounding-noise tie tolerance
        CHECK(fitted == Catch::Approx(brute_force_depth1(X, psi)).margin(1e-6));
    }
}

TEST_CASE("deeper searches never lose training value", "[policy]") {
    Rng rng(84);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 120;
        Eigen::MatrixXd X(n, 3);
        Eigen::VectorXd psi(n);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
            // XOR-flavored benefit: depth 2 has real structure to find
            const bool a = X(i, 0) > 0.0;
            const bool b = X(i, 1) > 0.0;
            psi[i] = (a != b ? 1.5 : -1.5) + 0.5 * rng.normal();
        }
        const double v1 = evaluate_policy(fit_policy_tree(X, psi, 1), X, psi).value;
        const double v2 = evaluate_policy(fit_policy_tree(X, psi, 2), X, psi).value;
        const double v3 = evaluate_policy(fit_policy_tree(X, psi, 3), X, psi).value;
        CHECK(v2 >= v1 - 1e-12);
        CHECK(v3 >= v2 - 1e-12);
        // constant policies are inside the search space
        CHECK(v1 >= std::abs(psi.sum()) - 1e-12);
    }
}

TEST_CASE("the optimal value is invariant to score scaling", "[policy]") {
    Rng rng(85);
    const std::size_t n = 150;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd psi(n);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
        psi[i] = rng.normal();
    }
    const PolicyTree a = fit_policy_tree(X, psi, 2);
    const PolicyTree b = fit_policy_tree(X, 2.5 * psi, 2);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].feature == b.nodes[i].feature);
        CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
        CHECK(a.nodes[i].assign == b.nodes[i].assign);
    }
    CHECK(evaluate_policy(b, X, 2.5 * psi).value ==
          Catch::Approx(2.5 * evaluate_policy(a, X, psi).value));
}

TEST_CASE("invalid depths and empty inputs are rejected", "[policy]") {
    Eigen::MatrixXd X(5, 2);
    X.setZero();
    Eigen::VectorXd psi = Eigen::VectorXd::Ones(5);
    CHECK_THROWS_AS(fit_policy_tree(X, psi, 0), UsageError);
    CHECK_THROWS_AS(fit_policy_tree(X, psi, 4), UsageError);
    Eigen::MatrixXd empty(0, 2);
    Eigen::VectorXd none(0);
    CHECK_THROWS_AS(fit_policy_tree(empty, none, 2), Error);
    Eigen::VectorXd bad = psi;
    bad[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_policy_tree(X, bad, 2), Error);
}

// ===========================================================================
// Evaluation
// ===========================================================================

TEST_CASE("constant policies score plus or minus the score total", "[policy]") {
    Rng rng(86);
    const std::size_t n = 80;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd psi(n);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        X(i, 0) = rng.normal();
        X(i, 1) = rng.normal();
        psi[i] = rng.normal(1.0, 3.0);
    }
    CHECK(evaluate_policy(constant_tree(1, 2), X, psi).value == Catch::Approx(psi.sum()));
    CHECK(evaluate_policy(constant_tree(0, 2), X, psi).value == Catch::Approx(-psi.sum()));
    CHECK(evaluate_policy(constant_tree(1, 2), X, psi).n == n);
}

TEST_CASE("prediction routes rows through the split structure", "[policy]") {
    // hand-built depth-2 tree:   x0 < 0 ? (x1 < 1 ? treat : control) : control
    PolicyTree tree;
    tree.feature_count = 2;
    PolicyNode root;
    root.feature = 0;
    root.threshold = 0.0;
    root.left = 1;
    root.right = 4;
    PolicyNode inner;
    inner.feature = 1;
    inner.threshold = 1.0;
    inner.left = 2;
    inner.right = 3;
    PolicyNode t1;
    t1.assign = 1;
    PolicyNode t0;
    t0.assign = 0;
    tree.nodes = {root, inner, t1, t0, t0};

    Eigen::RowVectorXd row(2);
    row << -1.0, 0.0;
    CHECK(predict_policy(tree, row) == 1);
    row << -1.0, 2.0;
    CHECK(predict_policy(tree, row) == 0);
    row << 1.0, 0.0;
    CHECK(predict_policy(tree, row) == 0);
    // off-path feature is ignored on the right branch
    row << 1.0, -100.0;
    CHECK(predict_policy(tree, row) == 0);

    Eigen::RowVectorXd wrong(3);
    wrong.setZero();
    CHECK_THROWS_AS(predict_policy(tree, wrong), Error);
}

// ===========================================================================
// Renderings
// ===========================================================================

TEST_CASE("text and DOT renderings name features and assignments", "[policy]") {
    Rng rng(87);
    const std::size_t n = 200;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd psi(n);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        X(i, 0) = rng.uniform();
        X(i, 1) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        psi[i] = (X(i, 1) != 0.0 ? 1.0 : -1.0) + 0.2 * rng.normal();
    }
    const PolicyTree tree = fit_policy_tree(X, psi, 1);
    const std::vector<std::string> names = {"Quantity", "Flag"};

    const std::string text = policy_to_text(tree, names);
    CHECK(text.find("if Flag < ") != std::string::npos);
    CHECK(text.find("assign 1") != std::string::npos);
    CHECK(text.find("assign 0") != std::string::npos);

    const std::string dot = policy_to_dot(tree, names, "policy");
    CHECK(dot.rfind("digraph policy {", 0) == 0);
    CHECK(dot.find("Flag < ") != std::string::npos);
    CHECK(dot.find("n0 -> n1") != std::string::npos);
    CHECK(dot.find("n0 -> n2") != std::string::npos);
    CHECK(dot.back() == '\n');
}
