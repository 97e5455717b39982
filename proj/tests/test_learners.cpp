// Boosted-tree regressors/classifiers, least squares, and grid-search CV.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "causalkit/cv.hpp"
#include "causalkit/learners.hpp"
#include "causalkit/ols.hpp"

using namespace causalkit;

namespace {

// one normally-distributed feature matrix
Eigen::MatrixXd random_design(std::size_t n, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) X(r, c) = rng.normal();
    }
    return X;
}

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

// rank-based AUC (probability that a positive outranks a negative)
double auc(const Eigen::VectorXd& score, const Eigen::VectorXd& label) {
    std::vector<std::size_t> order(static_cast<std::size_t>(score.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return score[static_cast<Eigen::Index>(a)] < score[static_cast<Eigen::Index>(b)];
    });
    double rank_sum = 0.0;
    double n_pos = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (label[static_cast<Eigen::Index>(order[r])] > 0.5) {
            rank_sum += static_cast<double>(r + 1);
            n_pos += 1.0;
        }
    }
    const double n_neg = static_cast<double>(score.size()) - n_pos;
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

}  // namespace

// ===========================================================================
// Regression
// ===========================================================================

TEST_CASE("constant target is predicted exactly by the base score", "[learners]") {
    const Eigen::MatrixXd X = random_design(100, 3, 1);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(100, 4.25);
    const Gbm model = fit_regressor(X, y, Hyperparams{50, 2, 0.1, 5, 1.0}, 1);
    const Eigen::VectorXd pred = model.predict(X);
    for (Eigen::Index i = 0; i < pred.size(); ++i) CHECK(pred[i] == Catch::Approx(4.25));
}

TEST_CASE("a single noiseless signal is learned to small training error", "[learners]") {
    const std::size_t n = 1000;
    const Eigen::MatrixXd X = random_design(n, 3, 2);
    const Eigen::VectorXd y = X.col(0);
    const Gbm model = fit_regressor(X, y, Hyperparams{300, 2, 0.1, 10, 1.0}, 2);
    const double var = (y.array() - y.mean()).square().mean();
    CHECK(mse(model.predict(X), y) < var / 10.0);
}

TEST_CASE("training loss is non-increasing over boosting rounds", "[learners]") {
    const Eigen::MatrixXd X = random_design(400, 4, 3);
    Rng rng(3);
    Eigen::VectorXd y(400);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y[i] = 2.0 * X(i, 0) - X(i, 1) + 0.5 * rng.normal();
    }
    const Gbm model = fit_regressor(X, y, Hyperparams{80, 3, 0.1, 10, 1.0}, 3);
    REQUIRE(model.train_loss.size() == 80);
    for (std::size_t t = 1; t < model.train_loss.size(); ++t) {
        CHECK(model.train_loss[t] <= model.train_loss[t - 1] + 1e-12);
    }
}

TEST_CASE("tiny learning budget stays near the constant baseline", "[learners]") {
    const Eigen::MatrixXd X = random_design(300, 2, 4);
    Rng rng(4);
    Eigen::VectorXd y(300);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = X(i, 0) + rng.normal();
    const Gbm model = fit_regressor(X, y, Hyperparams{1, 1, 0.01, 10, 1.0}, 4);
    const Eigen::VectorXd pred = model.predict(X);
    // one shallow tree at lr=0.01 moves predictions at most a whisker from the mean
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        CHECK(std::abs(pred[i] - y.mean()) < 0.1);
    }
}

// ===========================================================================
// Classification
// ===========================================================================

TEST_CASE("an uninformative classifier stays near the base rate", "[learners]") {
    const std::size_t n = 2000;
    const Eigen::MatrixXd X = random_design(n, 3, 5);
    Rng rng(5);
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const Gbm model = fit_classifier(X, d, Hyperparams{100, 2, 0.1, 20, 1.0}, 5);
    const Eigen::VectorXd p = model.predict(X);
    CHECK(p.mean() > 0.4);
    CHECK(p.mean() < 0.6);
}

TEST_CASE("a separable rule is ranked almost perfectly", "[learners]") {
    const std::size_t n = 1000;
    Rng rng(6);
    Eigen::MatrixXd X(n, 3);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) X(r, c) = rng.uniform();
    }
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = X(i, 0) > 0.5 ? 1.0 : 0.0;
    const Gbm model = fit_classifier(X, d, Hyperparams{200, 2, 0.1, 10, 1.0}, 6);
    CHECK(auc(model.predict(X), d) > 0.95);
}

TEST_CASE("probabilities are clipped away from zero and one", "[learners]") {
    const std::size_t n = 500;
    Rng rng(7);
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        X(i, 0) = rng.normal();
        d[i] = X(i, 0) > 0.0 ? 1.0 : 0.0;
    }
    const Gbm model = fit_classifier(X, d, Hyperparams{400, 3, 0.3, 5, 1.0}, 7);
    const Eigen::VectorXd p = model.predict(X);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        CHECK(p[i] >= Gbm::kProbClip);
        CHECK(p[i] <= 1.0 - Gbm::kProbClip);
    }
}

// ===========================================================================
// Least squares
// ===========================================================================

TEST_CASE("least squares recovers exact linear coefficients", "[learners]") {
    const std::size_t n = 50;
    Eigen::MatrixXd X = random_design(n, 1, 8);
    const Eigen::VectorXd y = 2.0 * X.col(0);
    const OlsFit fit = fit_ols(X, y);
    REQUIRE(fit.coef.size() == 1);
    CHECK_FALSE(fit.ridge_fallback);
    CHECK(fit.coef[0] == Catch::Approx(2.0).margin(1e-10));

    // intercept plus slope: y = 3 + 0*x
    Eigen::MatrixXd Xi(n, 2);
    Xi.col(0).setOnes();
    Xi.col(1) = X.col(0);
    const Eigen::VectorXd yi = Eigen::VectorXd::Constant(n, 3.0);
    const OlsFit fit2 = fit_ols(Xi, yi);
    CHECK(fit2.coef[0] == Catch::Approx(3.0).margin(1e-10));
    CHECK(fit2.coef[1] == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("least-squares residuals are orthogonal to the design", "[learners]") {
    const std::size_t n = 200;
    const Eigen::MatrixXd X = random_design(n, 4, 9);
    Rng rng(9);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = X(i, 0) - X(i, 2) + rng.normal();
    const OlsFit fit = fit_ols(X, y);
    const Eigen::VectorXd resid = y - X * fit.coef;
    CHECK((X.transpose() * resid).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("collinear designs fall back to a ridge solution", "[learners]") {
    const std::size_t n = 100;
    Eigen::MatrixXd X(n, 3);
    X.col(0) = random_design(n, 1, 10).col(0);
    X.col(1) = 2.0 * X.col(0);  // exact copy up to scale
    X.col(2).setOnes();
    Rng rng(10);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = X(i, 0) + rng.normal();
    const OlsFit fit = fit_ols(X, y);
    CHECK(fit.ridge_fallback);
    CHECK(fit.coef.allFinite());

    const OlsInference inf = ols_hc0(X, y);
    CHECK(inf.ridge_fallback);
    CHECK(inf.cov.allFinite());
}

TEST_CASE("robust covariance matches a hand-rolled sandwich", "[learners]") {
    const std::size_t n = 150;
    const Eigen::MatrixXd X = random_design(n, 3, 11);
    Rng rng(11);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y[i] = 1.0 + X(i, 1) + (1.0 + 0.5 * std::abs(X(i, 0))) * rng.normal();
    }
    const OlsInference inf = ols_hc0(X, y);

    const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    const Eigen::VectorXd resid = y - X * inf.coef;
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        meat += resid[i] * resid[i] * X.row(i).transpose() * X.row(i);
    }
    const Eigen::MatrixXd expected = bread * meat * bread;
    CHECK((inf.cov - expected).cwiseAbs().maxCoeff() < 1e-8);
}

// ===========================================================================
// Grid-search cross-validation
// ===========================================================================

TEST_CASE("a one-point grid is selected as best", "[learners]") {
    const Eigen::MatrixXd X = random_design(200, 2, 12);
    Rng rng(12);
    Eigen::VectorXd y(200);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = X(i, 0) + rng.normal();
    const Hyperparams only{50, 2, 0.1, 10, 1.0};
    const CvReport report = grid_search_cv(X, y, ModelKind::Regressor, {only}, 3, 12);
    REQUIRE(report.entries.size() == 1);
    CHECK(report.best.n_trees == only.n_trees);
    CHECK(report.best.max_depth == only.max_depth);
    CHECK(report.best_loss == report.entries[0].mean_loss);
}

TEST_CASE("interaction signals prefer deeper trees under CV", "[learners]") {
    const std::size_t n = 1500;
    Rng rng(13);
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        X(i, 0) = rng.uniform() < 0.5 ? -1.0 : 1.0;
        X(i, 1) = rng.uniform() < 0.5 ? -1.0 : 1.0;
        // pure interaction: no marginal signal for a depth-1 learner to find
        y[i] = 3.0 * X(i, 0) * X(i, 1) + 0.3 * rng.normal();
    }
    const std::vector<Hyperparams> grid = {
        Hyperparams{200, 1, 0.1, 10, 1.0},
        Hyperparams{200, 3, 0.1, 10, 1.0},
    };
    const CvReport report = grid_search_cv(X, y, ModelKind::Regressor, grid, 3, 13);
    CHECK(report.best.max_depth == 3);
    CHECK(report.entries[1].mean_loss < report.entries[0].mean_loss);
}

TEST_CASE("cross-validation is deterministic in the seed", "[learners]") {
    const Eigen::MatrixXd X = random_design(300, 3, 14);
    Rng rng(14);
    Eigen::VectorXd y(300);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = X(i, 1) + rng.normal();
    const std::vector<Hyperparams> grid = {Hyperparams{60, 2, 0.1, 10, 1.0},
                                           Hyperparams{60, 3, 0.1, 10, 1.0}};
    const CvReport a = grid_search_cv(X, y, ModelKind::Regressor, grid, 4, 99);
    const CvReport b = grid_search_cv(X, y, ModelKind::Regressor, grid, 4, 99);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].mean_loss == b.entries[i].mean_loss);
    }
    CHECK(a.best_loss == b.best_loss);
}

TEST_CASE("empty grids are rejected", "[learners]") {
    const Eigen::MatrixXd X = random_design(50, 2, 15);
    const Eigen::VectorXd y = X.col(0);
    CHECK_THROWS_AS(grid_search_cv(X, y, ModelKind::Regressor, {}, 3, 0), UsageError);
}

// ===========================================================================
// Serialization
// ===========================================================================

TEST_CASE("model serialization round-trips bit-identical predictions", "[learners]") {
    const Eigen::MatrixXd X = random_design(400, 4, 16);
    Rng rng(16);
    Eigen::VectorXd y(400);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y[i] = std::sin(X(i, 0)) + 0.5 * X(i, 2) + 0.2 * rng.normal();
    }
    const Gbm model = fit_regressor(X, y, Hyperparams{120, 3, 0.1, 10, 1.0}, 16);
    const Gbm copy = Gbm::deserialize(model.serialize());
    const Eigen::VectorXd a = model.predict(X);
    const Eigen::VectorXd b = copy.predict(X);
    for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    Eigen::VectorXd d(400);
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = y[i] > 0.0 ? 1.0 : 0.0;
    const Gbm clf = fit_classifier(X, d, Hyperparams{80, 2, 0.1, 10, 1.0}, 17);
    const Gbm clf_copy = Gbm::deserialize(clf.serialize());
    const Eigen::VectorXd pa = clf.predict(X);
    const Eigen::VectorXd pb = clf_copy.predict(X);
    for (Eigen::Index i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);
}

TEST_CASE("invalid hyperparameters are rejected up front", "[learners]") {
    const Eigen::MatrixXd X = random_design(100, 2, 18);
    const Eigen::VectorXd y = X.col(0);
    CHECK_THROWS_AS(fit_regressor(X, y, Hyperparams{0, 2, 0.1, 10, 1.0}, 0), UsageError);
    CHECK_THROWS_AS(fit_regressor(X, y, Hyperparams{10, 2, 1.5, 10, 1.0}, 0), UsageError);
    CHECK_THROWS_AS(fit_regressor(X, y, Hyperparams{10, 2, 0.1, 0, 1.0}, 0), UsageError);
}
