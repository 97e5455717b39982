#pragma once

// Debiased (double) machine-learning estimation of average treatment effects:
// the two equivalent partialling-out regressions, K-fold cross-fitted
// nuisance prediction, the doubly-robust interactive-model score, moment
// solving, sandwich inference, and repeated cross-fitting aggregation.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "causalkit/common.hpp"
#include "causalkit/cv.hpp"
#include "causalkit/design.hpp"
#include "causalkit/folds.hpp"
#include "causalkit/learners.hpp"
#include "causalkit/ols.hpp"

namespace causalkit {

struct DmlConfig {
    std::size_t k_folds = 5;
    std::size_t n_reps = 1;
    double trim = 0.01;
    double confidence_level = 0.95;
    std::uint64_t seed = 0;

    void validate() const {
        if (k_folds < 2) throw UsageError("dml config: k_folds must be at least 2");
        if (n_reps < 1) throw UsageError("dml config: n_reps must be at least 1");
        if (trim < 0.0 || trim >= 0.5) throw UsageError("dml config: trim must lie in [0, 0.5)");
        if (!(confidence_level > 0.0) || !(confidence_level < 1.0)) {
            throw UsageError("dml config: confidence_level must lie in (0, 1)");
        }
    }
};

struct LearnerGrids {
    std::vector<Hyperparams> regressor = default_grid();
    std::vector<Hyperparams> classifier = default_grid();

    static LearnerGrids single(const Hyperparams& hp) { return LearnerGrids{{hp}, {hp}}; }
};

struct NuisancePredictions {
    Eigen::VectorXd g0_hat;  // per-row outcome prediction under control
    Eigen::VectorXd g1_hat;  // per-row outcome prediction under treatment
    Eigen::VectorXd m_hat;   // per-row propensity, trimmed
    FoldPlan plan;           // training-set bookkeeping: fold f models never saw fold f rows
    std::size_t clamped_count = 0;  // rows whose propensity hit the trimming bounds
    Hyperparams regressor_hp;
    Hyperparams classifier_hp;
};

struct OrthoScores {
    Eigen::VectorXd psi_a;
    Eigen::VectorXd psi_b;
    std::size_t rep_index = 0;
    std::string treatment_name;
};

struct AteEstimate {
    double theta = 0.0;
    double std_error = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_used = 0;
    // provenance for report rows
    std::string treatment;
    std::size_t k_folds = 0;
    std::size_t n_reps = 1;
    std::size_t clamped_count = 0;
    double confidence_level = 0.95;
};

// ---------------------------------------------------------------------------
// Partialling-out equivalence (the two regression routes)
// ---------------------------------------------------------------------------

// Coefficient on D from one multiple regression of Y on [1, D, Z].
inline double fwl_direct(const Eigen::VectorXd& Y, const Eigen::VectorXd& D,
                         const Eigen::MatrixXd& Z) {
    if (Y.size() != D.size() || (Z.cols() > 0 && Z.rows() != Y.size())) {
        throw Error("fwl_direct: length mismatch");
    }
    const Eigen::Index n = Y.size();
    Eigen::MatrixXd X(n, 2 + Z.cols());
    X.col(0).setOnes();
    X.col(1) = D;
    if (Z.cols() > 0) X.rightCols(Z.cols()) = Z;
    const OlsFit fit = fit_ols(X, Y);
    if (fit.ridge_fallback) throw Error("fwl_direct: rank-deficient design");
    return fit.coef[1];
}

// The same coefficient via residual-on-residual regression: partial Z out of
// both Y and D, then regress the Y-residuals on the D-residuals.
inline double fwl_threestep(const Eigen::VectorXd& Y, const Eigen::VectorXd& D,
                            const Eigen::MatrixXd& Z) {
    if (Y.size() != D.size() || (Z.cols() > 0 && Z.rows() != Y.size())) {
        throw Error("fwl_threestep: length mismatch");
    }
    const Eigen::Index n = Y.size();
    Eigen::MatrixXd Zi(n, 1 + Z.cols());
    Zi.col(0).setOnes();
    if (Z.cols() > 0) Zi.rightCols(Z.cols()) = Z;

    const OlsFit fd = fit_ols(Zi, D);
    if (fd.ridge_fallback) throw Error("fwl_threestep: rank-deficient design");
    const Eigen::VectorXd rd = D - Zi * fd.coef;
    const OlsFit fy = fit_ols(Zi, Y);
    const Eigen::VectorXd ry = Y - Zi * fy.coef;

    const double denom = rd.squaredNorm();
    if (denom <= 1e-10 * std::max(1.0, D.squaredNorm())) {
        throw Error("fwl_threestep: no residual variation in treatment after partialling out");
    }
    return rd.dot(ry) / denom;
}

// ---------------------------------------------------------------------------
// Cross-fitted nuisances
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

inline Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(rows[i])];
    }
    return out;
}

// A single-point grid is used as-is; otherwise cross-validated selection on
// the full sample (hyperparameters are shared across folds; the per-fold
// model weights still never see their held-out rows).
inline Hyperparams select_hp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ModelKind kind,
                             const std::vector<Hyperparams>& grid, std::uint64_t seed) {
    if (grid.empty()) throw UsageError("nuisance grid must be nonempty");
    if (grid.size() == 1) return grid.front();
    const std::size_t k = std::min<std::size_t>(5, static_cast<std::size_t>(X.rows()) / 2);
    return grid_search_cv(X, y, kind, grid, std::max<std::size_t>(k, 2), seed).best;
}

}  // namespace detail

// For each fold: one propensity classifier and one outcome regressor per
// treatment arm, all trained outside the fold, predicting inside it.
inline NuisancePredictions crossfit_nuisances(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                                              const Eigen::VectorXd& D, const DmlConfig& config,
                                              const LearnerGrids& grids,
                                              std::uint64_t fold_seed_salt = 0) {
    config.validate();
    const auto n = static_cast<std::size_t>(X.rows());
    if (Y.size() != X.rows() || D.size() != X.rows()) throw Error("crossfit: length mismatch");

    std::vector<int> labels(n);
    std::size_t n_treated = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = D[static_cast<Eigen::Index>(i)];
        if (d != 0.0 && d != 1.0) throw Error("crossfit: treatment must be 0/1");
        labels[i] = d != 0.0 ? 1 : 0;
        n_treated += static_cast<std::size_t>(labels[i]);
    }
    if (n_treated == 0 || n_treated == n) {
        throw Error("crossfit: treatment has a single class");
    }

    const std::uint64_t seed = mix_u64(config.seed, fold_seed_salt);
    NuisancePredictions nu;
    nu.plan = make_stratified_folds(labels, config.k_folds, seed);
    nu.g0_hat.resize(static_cast<Eigen::Index>(n));
    nu.g1_hat.resize(static_cast<Eigen::Index>(n));
    nu.m_hat.resize(static_cast<Eigen::Index>(n));

    nu.regressor_hp = detail::select_hp(X, Y, ModelKind::Regressor, grids.regressor,
                                        mix_u64(seed, 0xA11C));
    nu.classifier_hp = detail::select_hp(X, D, ModelKind::Classifier, grids.classifier,
                                         mix_u64(seed, 0xB22D));

    for (std::size_t f = 0; f < config.k_folds; ++f) {
        const std::vector<std::size_t> train = nu.plan.train_rows(static_cast<int>(f));
        const std::vector<std::size_t> test = nu.plan.test_rows(static_cast<int>(f));

        std::vector<std::size_t> arm1;
        std::vector<std::size_t> arm0;
        for (std::size_t r : train) {
            (labels[r] ? arm1 : arm0).push_back(r);
        }
        if (arm1.empty() || arm0.empty()) {
            throw Error(strfmt("crossfit: fold %zu training split lacks a treatment arm "
                               "(treated=%zu, control=%zu)",
                               f, arm1.size(), arm0.size()));
        }

        try {
            const Gbm cls = fit_classifier(detail::take_rows(X, train), detail::take(D, train),
                                           nu.classifier_hp, mix_u64(seed, 3 * f + 1));
            const Gbm g1 = fit_regressor(detail::take_rows(X, arm1), detail::take(Y, arm1),
                                         nu.regressor_hp, mix_u64(seed, 3 * f + 2));
            const Gbm g0 = fit_regressor(detail::take_rows(X, arm0), detail::take(Y, arm0),
                                         nu.regressor_hp, mix_u64(seed, 3 * f + 3));

            const Eigen::MatrixXd x_test = detail::take_rows(X, test);
            const Eigen::VectorXd m = cls.predict(x_test);
            const Eigen::VectorXd p1 = g1.predict(x_test);
            const Eigen::VectorXd p0 = g0.predict(x_test);
            for (std::size_t i = 0; i < test.size(); ++i) {
                const auto r = static_cast<Eigen::Index>(test[i]);
                nu.m_hat[r] = m[static_cast<Eigen::Index>(i)];
                nu.g1_hat[r] = p1[static_cast<Eigen::Index>(i)];
                nu.g0_hat[r] = p0[static_cast<Eigen::Index>(i)];
            }
        } catch (const Error& e) {
            throw Error(strfmt("crossfit: fold %zu: %s", f, e.what()));
        }
    }

    if (config.trim > 0.0) {
        for (Eigen::Index i = 0; i < nu.m_hat.size(); ++i) {
            const double m = nu.m_hat[i];
            const double clamped = std::clamp(m, config.trim, 1.0 - config.trim);
            if (clamped != m) {
                nu.m_hat[i] = clamped;
                ++nu.clamped_count;
            }
        }
    }
    return nu;
}

// ---------------------------------------------------------------------------
// Orthogonal scores and inference
// ---------------------------------------------------------------------------

// Doubly-robust score for the ATE under the interactive (fully nonparametric)
// model: the regression-adjustment difference plus inverse-propensity
// weighted residual corrections. Linear in theta: psi = psi_a * theta + psi_b
// with psi_a identically -1.
inline OrthoScores irm_score(const Eigen::VectorXd& Y, const Eigen::VectorXd& D,
                             const NuisancePredictions& nu) {
    const Eigen::Index n = Y.size();
    if (D.size() != n || nu.g0_hat.size() != n || nu.g1_hat.size() != n || nu.m_hat.size() != n) {
        throw Error("irm_score: length mismatch");
    }
    OrthoScores s;
    s.psi_a = Eigen::VectorXd::Constant(n, -1.0);
    s.psi_b.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = nu.m_hat[i];
        if (!(m > 0.0) || !(m < 1.0)) throw Error("irm_score: propensity outside (0, 1)");
        const double g1 = nu.g1_hat[i];
        const double g0 = nu.g0_hat[i];
        const double d = D[i];
        s.psi_b[i] = g1 - g0 + d * (Y[i] - g1) / m - (1.0 - d) * (Y[i] - g0) / (1.0 - m);
        if (!std::isfinite(s.psi_b[i])) throw Error("irm_score: non-finite score");
    }
    return s;
}

// Partialling-out score for the partially linear model: psi_a = -(D - m)^2,
// psi_b = (Y - l)(D - m), with l(X) ~ E[Y|X].
inline OrthoScores plr_score(const Eigen::VectorXd& Y, const Eigen::VectorXd& D,
                             const Eigen::VectorXd& l_hat, const Eigen::VectorXd& m_hat) {
    const Eigen::Index n = Y.size();
    if (D.size() != n || l_hat.size() != n || m_hat.size() != n) {
        throw Error("plr_score: length mismatch");
    }
    OrthoScores s;
    s.psi_a.resize(n);
    s.psi_b.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = D[i] - m_hat[i];
        s.psi_a[i] = -v * v;
        s.psi_b[i] = (Y[i] - l_hat[i]) * v;
        if (!std::isfinite(s.psi_b[i])) throw Error("plr_score: non-finite score");
    }
    return s;
}

// theta solving the empirical moment condition mean(psi_a * theta + psi_b) = 0.
inline double solve_theta(const OrthoScores& s) {
    if (s.psi_b.size() == 0) throw Error("solve_theta: empty scores");
    const double a = s.psi_a.mean();
    if (a == 0.0) throw Error("solve_theta: degenerate score (mean psi_a = 0)");
    return -s.psi_b.mean() / a;
}

// Sandwich variance: var = mean(psi^2) / (J^2 n) with J = mean(psi_a) and
// psi = psi_a * theta + psi_b. Normal reference distribution throughout.
inline AteEstimate inference(const OrthoScores& s, double theta, double level = 0.95) {
    const Eigen::Index n = s.psi_b.size();
    if (n < 2) throw Error("inference: need at least two observations");
    if (!(level > 0.0) || !(level < 1.0)) throw UsageError("inference: level must be in (0, 1)");

    const double j = s.psi_a.mean();
    double mean_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double psi = s.psi_a[i] * theta + s.psi_b[i];
        mean_sq += psi * psi;
    }
    mean_sq /= static_cast<double>(n);
    const double variance = mean_sq / (j * j * static_cast<double>(n));
    if (!(variance > 0.0)) throw Error("inference: zero score variance (degenerate)");

    AteEstimate est;
    est.theta = theta;
    est.std_error = std::sqrt(variance);
    est.t_statistic = theta / est.std_error;
    est.p_value = normal_two_sided_p(est.t_statistic);
    const double z = normal_quantile(0.5 + level / 2.0);
    est.ci_low = theta - z * est.std_error;
    est.ci_high = theta + z * est.std_error;
    est.n_used = static_cast<std::size_t>(n);
    est.confidence_level = level;
    return est;
}

// ---------------------------------------------------------------------------
// Full pipelines
// ---------------------------------------------------------------------------

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) throw Error("median: empty");
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    if (v.size() % 2 == 1) return v[mid];
    return 0.5 * (v[mid - 1] + v[mid]);
}

struct RepResult {
    double theta = 0.0;
    double se = 0.0;
    std::size_t clamped = 0;
};

// Median aggregation across cross-fitting repetitions: point estimate is the
// median theta; the variance adds the spread of per-rep estimates around it.
inline AteEstimate aggregate_reps(const std::vector<RepResult>& reps, std::size_t n, double level) {
    std::vector<double> thetas;
    thetas.reserve(reps.size());
    for (const auto& r : reps) thetas.push_back(r.theta);
    const double theta = median(thetas);

    std::vector<double> adj;
    adj.reserve(reps.size());
    std::size_t clamped = 0;
    for (const auto& r : reps) {
        adj.push_back(r.se * r.se + (r.theta - theta) * (r.theta - theta));
        clamped += r.clamped;
    }
    const double variance = median(adj);
    if (!(variance > 0.0)) throw Error("inference: zero aggregated variance");

    AteEstimate est;
    est.theta = theta;
    est.std_error = std::sqrt(variance);
    est.t_statistic = theta / est.std_error;
    est.p_value = normal_two_sided_p(est.t_statistic);
    const double z = normal_quantile(0.5 + level / 2.0);
    est.ci_low = theta - z * est.std_error;
    est.ci_high = theta + z * est.std_error;
    est.n_used = n;
    est.clamped_count = clamped;
    est.confidence_level = level;
    return est;
}

}  // namespace detail

// Vector-level entry point: covariate matrix already assembled by the caller.
// When `scores_out` is given it receives the first repetition's orthogonal
// scores, which downstream consumers (effect curves, policy trees) reuse.
inline AteEstimate estimate_ate_vectors(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                                        const Eigen::VectorXd& D, const DmlConfig& config,
                                        const LearnerGrids& grids,
                                        OrthoScores* scores_out = nullptr) {
    config.validate();
    std::vector<detail::RepResult> reps;
    reps.reserve(config.n_reps);
    for (std::size_t rep = 0; rep < config.n_reps; ++rep) {
        const NuisancePredictions nu = crossfit_nuisances(X, Y, D, config, grids, rep);
        OrthoScores scores = irm_score(Y, D, nu);
        scores.rep_index = rep;
        const double theta = solve_theta(scores);
        const AteEstimate one = inference(scores, theta, config.confidence_level);
        reps.push_back(detail::RepResult{one.theta, one.std_error, nu.clamped_count});
        if (rep == 0 && scores_out != nullptr) *scores_out = scores;
        if (config.n_reps == 1) {
            AteEstimate est = one;
            est.k_folds = config.k_folds;
            est.n_reps = 1;
            est.clamped_count = nu.clamped_count;
            return est;
        }
    }
    AteEstimate est = detail::aggregate_reps(reps, static_cast<std::size_t>(Y.size()),
                                             config.confidence_level);
    est.k_folds = config.k_folds;
    est.n_reps = config.n_reps;
    return est;
}

// Confounder selection for a named treatment: every covariate-role feature
// except the treatment's own indicator, any sibling indicators from the same
// source column, and caller-designated exclusions (e.g. descendants of the
// treatment in a known graph).
inline std::vector<int> ate_covariates(const DesignMatrix& dm, const std::string& outcome,
                                       const std::string& treatment,
                                       const std::set<std::string>& exclude = {}) {
    const int t_idx = dm.feature_index(treatment);
    if (t_idx < 0) throw Error("no such feature: '" + treatment + "'");
    std::set<std::string> excl = exclude;
    excl.insert(outcome);
    excl.insert(treatment);
    excl.insert(dm.source_column[static_cast<std::size_t>(t_idx)].name);
    const std::vector<int> cov = dm.covariate_features(excl);
    if (cov.empty()) throw Error("estimate_ate: no covariates left after exclusions");
    return cov;
}

// Named-column entry point over an encoded design.
inline AteEstimate estimate_ate(const DesignMatrix& dm, const std::string& outcome,
                                const std::string& treatment, const DmlConfig& config,
                                const LearnerGrids& grids = LearnerGrids{},
                                const std::set<std::string>& exclude = {},
                                OrthoScores* scores_out = nullptr) {
    const Eigen::VectorXd Y = dm.feature(outcome);
    const Eigen::VectorXd D = dm.feature(treatment);
    for (Eigen::Index i = 0; i < D.size(); ++i) {
        if (D[i] != 0.0 && D[i] != 1.0) {
            throw Error("estimate_ate: treatment '" + treatment + "' is not binary 0/1");
        }
    }

    const std::vector<int> cov = ate_covariates(dm, outcome, treatment, exclude);
    AteEstimate est =
        estimate_ate_vectors(dm.submatrix(cov).values, Y, D, config, grids, scores_out);
    est.treatment = treatment;
    if (scores_out != nullptr) scores_out->treatment_name = treatment;
    return est;
}

// Same engine, partially linear model: one outcome regression on all rows
// instead of per-arm regressions.
inline AteEstimate estimate_plr_vectors(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                                        const Eigen::VectorXd& D, const DmlConfig& config,
                                        const LearnerGrids& grids) {
    config.validate();
    const auto n = static_cast<std::size_t>(X.rows());

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = D[static_cast<Eigen::Index>(i)] != 0.0 ? 1 : 0;
    }

    std::vector<detail::RepResult> reps;
    reps.reserve(config.n_reps);
    for (std::size_t rep = 0; rep < config.n_reps; ++rep) {
        const std::uint64_t seed = mix_u64(config.seed, rep);
        const FoldPlan plan = make_stratified_folds(labels, config.k_folds, seed);

        const Hyperparams reg_hp = detail::select_hp(X, Y, ModelKind::Regressor, grids.regressor,
                                                     mix_u64(seed, 0xA11C));
        const Hyperparams cls_hp = detail::select_hp(X, D, ModelKind::Classifier, grids.classifier,
                                                     mix_u64(seed, 0xB22D));

        Eigen::VectorXd l_hat(static_cast<Eigen::Index>(n));
        Eigen::VectorXd m_hat(static_cast<Eigen::Index>(n));
        std::size_t clamped = 0;
        for (std::size_t f = 0; f < config.k_folds; ++f) {
            const auto train = plan.train_rows(static_cast<int>(f));
            const auto test = plan.test_rows(static_cast<int>(f));
            try {
                const Gbm reg = fit_regressor(detail::take_rows(X, train), detail::take(Y, train),
                                              reg_hp, mix_u64(seed, 2 * f + 1));
                const Gbm cls = fit_classifier(detail::take_rows(X, train), detail::take(D, train),
                                               cls_hp, mix_u64(seed, 2 * f + 2));
                const Eigen::MatrixXd x_test = detail::take_rows(X, test);
                const Eigen::VectorXd lp = reg.predict(x_test);
                const Eigen::VectorXd mp = cls.predict(x_test);
                for (std::size_t i = 0; i < test.size(); ++i) {
                    const auto r = static_cast<Eigen::Index>(test[i]);
                    l_hat[r] = lp[static_cast<Eigen::Index>(i)];
                    double m = mp[static_cast<Eigen::Index>(i)];
                    if (config.trim > 0.0) {
                        const double c = std::clamp(m, config.trim, 1.0 - config.trim);
                        if (c != m) ++clamped;
                        m = c;
                    }
                    m_hat[r] = m;
                }
            } catch (const Error& e) {
                throw Error(strfmt("plr crossfit: fold %zu: %s", f, e.what()));
            }
        }

        OrthoScores scores = plr_score(Y, D, l_hat, m_hat);
        scores.rep_index = rep;
        const double theta = solve_theta(scores);
        const AteEstimate one = inference(scores, theta, config.confidence_level);
        reps.push_back(detail::RepResult{one.theta, one.std_error, clamped});
        if (config.n_reps == 1) {
            AteEstimate est = one;
            est.k_folds = config.k_folds;
            est.n_reps = 1;
            est.clamped_count = clamped;
            return est;
        }
    }
    AteEstimate est = detail::aggregate_reps(reps, n, config.confidence_level);
    est.k_folds = config.k_folds;
    est.n_reps = config.n_reps;
    return est;
}

inline AteEstimate estimate_plr(const DesignMatrix& dm, const std::string& outcome,
                                const std::string& treatment, const DmlConfig& config,
                                const LearnerGrids& grids = LearnerGrids{},
                                const std::set<std::string>& exclude = {}) {
    const Eigen::VectorXd Y = dm.feature(outcome);
    const Eigen::VectorXd D = dm.feature(treatment);
    std::set<std::string> excl = exclude;
    excl.insert(outcome);
    excl.insert(treatment);
    const int t_idx = dm.feature_index(treatment);
    excl.insert(dm.source_column[static_cast<std::size_t>(t_idx)].name);
    const std::vector<int> cov = dm.covariate_features(excl);
    if (cov.empty()) throw Error("estimate_plr: no covariates left after exclusions");
    AteEstimate est = estimate_plr_vectors(dm.submatrix(cov).values, Y, D, config, grids);
    est.treatment = treatment;
    return est;
}

// Unadjusted benchmark: raw difference in group means with a two-sample
// (unequal variance) standard error. Biased under confounding by design.
inline AteEstimate naive_diff_means(const Eigen::VectorXd& Y, const Eigen::VectorXd& D,
                                    double level = 0.95) {
    double s1 = 0.0;
    double s0 = 0.0;
    std::size_t n1 = 0;
    std::size_t n0 = 0;
    for (Eigen::Index i = 0; i < Y.size(); ++i) {
        if (D[i] != 0.0) {
            s1 += Y[i];
            ++n1;
        } else {
            s0 += Y[i];
            ++n0;
        }
    }
    if (n1 < 2 || n0 < 2) throw Error("naive_diff_means: need at least two rows per arm");
    const double m1 = s1 / static_cast<double>(n1);
    const double m0 = s0 / static_cast<double>(n0);
    double v1 = 0.0;
    double v0 = 0.0;
    for (Eigen::Index i = 0; i < Y.size(); ++i) {
        if (D[i] != 0.0) {
            v1 += (Y[i] - m1) * (Y[i] - m1);
        } else {
            v0 += (Y[i] - m0) * (Y[i] - m0);
        }
    }
    v1 /= static_cast<double>(n1 - 1);
    v0 /= static_cast<double>(n0 - 1);

    AteEstimate est;
    est.theta = m1 - m0;
    est.std_error = std::sqrt(v1 / static_cast<double>(n1) + v0 / static_cast<double>(n0));
    if (!(est.std_error > 0.0)) throw Error("naive_diff_means: zero variance");
    est.t_statistic = est.theta / est.std_error;
    est.p_value = normal_two_sided_p(est.t_statistic);
    const double z = normal_quantile(0.5 + level / 2.0);
    est.ci_low = est.theta - z * est.std_error;
    est.ci_high = est.theta + z * est.std_error;
    est.n_used = static_cast<std::size_t>(Y.size());
    est.confidence_level = level;
    return est;
}

}  // namespace causalkit
