#pragma once

// Ordinary least squares with a flagged ridge fallback for rank-deficient
// designs, plus heteroskedasticity-robust (HC0) coefficient covariance.

#include <Eigen/Dense>

#include "causalkit/common.hpp"
#include "causalkit/design.hpp"

namespace causalkit {

struct OlsFit {
    Eigen::VectorXd coef;
    bool ridge_fallback = false;  // rank-deficient design; penalty 1e-8 applied
};

inline OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw Error("fit_ols: row count mismatch");
    if (X.rows() == 0 || X.cols() == 0) throw Error("fit_ols: empty design");
    if (!y.allFinite() || !X.allFinite()) throw Error("fit_ols: non-finite input");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    OlsFit fit;
    if (qr.rank() == X.cols()) {
        fit.coef = qr.solve(y);
        return fit;
    }
    // Collinear columns (e.g. a full one-hot group next to an intercept):
    // minimum-curvature tie-break via a tiny ridge penalty, reported to the
    // caller so downstream inference can refuse or warn.
    const Eigen::MatrixXd xtx =
        X.transpose() * X + 1e-8 * Eigen::MatrixXd::Identity(X.cols(), X.cols());
    fit.coef = xtx.ldlt().solve(X.transpose() * y);
    fit.ridge_fallback = true;
    return fit;
}

inline OlsFit fit_ols(const DesignMatrix& X, const Eigen::VectorXd& y) {
    return fit_ols(X.values, y);
}

struct OlsInference {
    Eigen::VectorXd coef;
    Eigen::MatrixXd cov;  // HC0 sandwich covariance of coef
    bool ridge_fallback = false;
};

// HC0: (X'X)^-1 X' diag(e_i^2) X (X'X)^-1 with e the OLS residuals.
inline OlsInference ols_hc0(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const OlsFit fit = fit_ols(X, y);
    const Eigen::VectorXd resid = y - X * fit.coef;

    Eigen::MatrixXd xtx = X.transpose() * X;
    if (fit.ridge_fallback) {
        xtx += 1e-8 * Eigen::MatrixXd::Identity(X.cols(), X.cols());
    }
    const Eigen::MatrixXd bread = xtx.ldlt().solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
    const Eigen::MatrixXd meat = X.transpose() * resid.array().square().matrix().asDiagonal() * X;

    OlsInference inf;
    inf.coef = fit.coef;
    inf.cov = bread * meat * bread;
    inf.ridge_fallback = fit.ridge_fallback;
    return inf;
}

}  // namespace causalkit
