#pragma once

// Grid-search hyperparameter selection by K-fold cross-validation: squared
// error for regressors, log loss for classifiers, pooled over out-of-fold
// predictions. Ties go to the earlier grid entry.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "causalkit/common.hpp"
#include "causalkit/folds.hpp"
#include "causalkit/learners.hpp"

namespace causalkit {

struct CvEntry {
    Hyperparams hp;
    double mean_loss = 0.0;
};

struct CvReport {
    std::vector<CvEntry> entries;  // grid order
    Hyperparams best;
    double best_loss = 0.0;
};

inline CvReport grid_search_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ModelKind kind,
                               const std::vector<Hyperparams>& grid, std::size_t k,
                               std::uint64_t seed) {
    if (grid.empty()) throw UsageError("grid_search_cv: empty grid");
    const auto n = static_cast<std::size_t>(X.rows());

    FoldPlan plan;
    if (kind == ModelKind::Classifier) {
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = y[static_cast<Eigen::Index>(i)] != 0.0 ? 1 : 0;
        }
        plan = make_stratified_folds(labels, k, seed);
    } else {
        plan = make_folds(n, k, seed);
    }

    CvReport report;
    report.entries.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double loss_sum = 0.0;
        for (std::size_t f = 0; f < k; ++f) {
            const std::vector<std::size_t> train = plan.train_rows(static_cast<int>(f));
            const std::vector<std::size_t> test = plan.test_rows(static_cast<int>(f));

            Eigen::MatrixXd x_train(static_cast<Eigen::Index>(train.size()), X.cols());
            Eigen::VectorXd y_train(static_cast<Eigen::Index>(train.size()));
            for (std::size_t i = 0; i < train.size(); ++i) {
                x_train.row(static_cast<Eigen::Index>(i)) =
                    X.row(static_cast<Eigen::Index>(train[i]));
                y_train[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(train[i])];
            }
            Eigen::MatrixXd x_test(static_cast<Eigen::Index>(test.size()), X.cols());
            for (std::size_t i = 0; i < test.size(); ++i) {
                x_test.row(static_cast<Eigen::Index>(i)) =
                    X.row(static_cast<Eigen::Index>(test[i]));
            }

            Gbm model;
            try {
                const std::uint64_t model_seed = mix_u64(seed, static_cast<std::uint64_t>(f) + 1);
                model = kind == ModelKind::Regressor
                            ? fit_regressor(x_train, y_train, grid[g], model_seed)
                            : fit_classifier(x_train, y_train, grid[g], model_seed);
            } catch (const Error& e) {
                throw Error(strfmt("grid point %zu (%s), fold %zu: %s", g,
                                   grid[g].describe().c_str(), f, e.what()));
            }

            const Eigen::VectorXd pred = model.predict(x_test);
            for (std::size_t i = 0; i < test.size(); ++i) {
                const double truth = y[static_cast<Eigen::Index>(test[i])];
                const double p = pred[static_cast<Eigen::Index>(i)];
                if (kind == ModelKind::Regressor) {
                    loss_sum += (p - truth) * (p - truth);
                } else {
                    loss_sum -= truth * std::log(p) + (1.0 - truth) * std::log(1.0 - p);
                }
            }
        }
        report.entries.push_back(CvEntry{grid[g], loss_sum / static_cast<double>(n)});
    }

    std::size_t best = 0;
    for (std::size_t g = 1; g < report.entries.size(); ++g) {
        if (report.entries[g].mean_loss < report.entries[best].mean_loss) best = g;
    }
    report.best = report.entries[best].hp;
    report.best_loss = report.entries[best].mean_loss;
    return report;
}

inline CvReport grid_search_cv(const DesignMatrix& X, const Eigen::VectorXd& y, ModelKind kind,
                               const std::vector<Hyperparams>& grid, std::size_t k,
                               std::uint64_t seed) {
    return grid_search_cv(X.values, y, kind, grid, k, seed);
}

}  // namespace causalkit
