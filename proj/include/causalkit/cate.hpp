#pragma once

// Conditional effect curves: project the per-row orthogonal signal onto a
// clamped B-spline basis of one covariate (OLS with heteroskedasticity-robust
// covariance) and evaluate pointwise confidence bands on a grid.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "causalkit/common.hpp"
#include "causalkit/ols.hpp"

namespace causalkit {

struct SplineBasis {
    int degree = 3;
    int df = 5;                   // basis size; df = interior knots + degree + 1
    std::vector<double> knots;    // full clamped knot vector
    double boundary_low = 0.0;
    double boundary_high = 1.0;
};

struct CateCurve {
    std::vector<double> grid;
    std::vector<double> estimate;
    std::vector<double> band_low;
    std::vector<double> band_high;
    double level = 0.95;
};

namespace detail {

// type-7 (linear interpolation) quantile of a sorted copy
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace detail

// Clamped B-spline basis with interior knots at equally-spaced quantiles of
// the observed covariate.
inline SplineBasis build_basis(const std::vector<double>& x, int df = 5, int degree = 3) {
    if (degree < 1) throw UsageError("build_basis: degree must be positive");
    if (df < degree + 1) throw UsageError("build_basis: df must be at least degree + 1");
    if (x.empty()) throw Error("build_basis: empty covariate");

    std::vector<double> sorted = x;
    for (double v : sorted) {
        if (!std::isfinite(v)) throw Error("build_basis: non-finite covariate value");
    }
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    if (hi <= lo) throw Error("build_basis: constant covariate");

    std::size_t distinct = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] != sorted[i - 1]) ++distinct;
    }
    if (distinct < static_cast<std::size_t>(df)) {
        throw Error(strfmt("build_basis: need at least %d distinct values, got %zu", df, distinct));
    }

    SplineBasis basis;
    basis.degree = degree;
    basis.df = df;
    basis.boundary_low = lo;
    basis.boundary_high = hi;

    const int n_interior = df - degree - 1;
    basis.knots.assign(static_cast<std::size_t>(degree + 1), lo);
    for (int i = 1; i <= n_interior; ++i) {
        basis.knots.push_back(
            detail::quantile_sorted(sorted, static_cast<double>(i) / (n_interior + 1)));
    }
    basis.knots.insert(basis.knots.end(), static_cast<std::size_t>(degree + 1), hi);
    return basis;
}

// One basis row by the Cox–de Boor recursion: df values, non-negative,
// summing to 1 on [boundary_low, boundary_high].
inline Eigen::RowVectorXd eval_basis(const SplineBasis& basis, double x) {
    if (!(x >= basis.boundary_low) || !(x <= basis.boundary_high)) {
        throw Error(strfmt("spline evaluation outside [%g, %g]: %g", basis.boundary_low,
                           basis.boundary_high, x));
    }
    const auto& t = basis.knots;
    const int p = basis.degree;
    const int n_basis = basis.df;

    // knot span containing x; the right boundary folds into the last span
    int k = n_basis - 1;  // default: last span, covers x == boundary_high
    for (int i = p; i < n_basis; ++i) {
        if (x >= t[static_cast<std::size_t>(i)] && x < t[static_cast<std::size_t>(i) + 1]) {
            k = i;
            break;
        }
    }

    std::vector<double> nvals(static_cast<std::size_t>(p) + 1, 0.0);
    std::vector<double> left(static_cast<std::size_t>(p) + 1, 0.0);
    std::vector<double> right(static_cast<std::size_t>(p) + 1, 0.0);
    nvals[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[static_cast<std::size_t>(j)] = x - t[static_cast<std::size_t>(k + 1 - j)];
        right[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(k + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[static_cast<std::size_t>(r) + 1] +
                                 left[static_cast<std::size_t>(j - r)];
            const double temp = denom != 0.0 ? nvals[static_cast<std::size_t>(r)] / denom : 0.0;
            nvals[static_cast<std::size_t>(r)] =
                saved + right[static_cast<std::size_t>(r) + 1] * temp;
            saved = left[static_cast<std::size_t>(j - r)] * temp;
        }
        nvals[static_cast<std::size_t>(j)] = saved;
    }

    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n_basis);
    for (int j = 0; j <= p; ++j) {
        const int idx = k - p + j;
        row[idx] = nvals[static_cast<std::size_t>(j)];
    }
    return row;
}

inline Eigen::MatrixXd basis_matrix(const SplineBasis& basis, const std::vector<double>& x) {
    Eigen::MatrixXd B(static_cast<Eigen::Index>(x.size()), basis.df);
    for (std::size_t i = 0; i < x.size(); ++i) {
        B.row(static_cast<Eigen::Index>(i)) = eval_basis(basis, x[i]);
    }
    return B;
}

struct CateProjection {
    Eigen::VectorXd coef;
    Eigen::MatrixXd cov;  // HC0
};

// OLS of the orthogonal signal on the basis columns, robust covariance.
inline CateProjection project_cate(const Eigen::VectorXd& psi_b, const Eigen::MatrixXd& B) {
    if (psi_b.size() != B.rows()) throw Error("project_cate: length mismatch");
    const OlsInference inf = ols_hc0(B, psi_b);
    if (inf.ridge_fallback) throw Error("project_cate: rank-deficient basis");
    return CateProjection{inf.coef, inf.cov};
}

inline CateCurve cate_curve(const CateProjection& proj, const SplineBasis& basis,
                            std::size_t grid_count, double level = 0.95) {
    if (grid_count < 2) throw UsageError("cate_curve: grid must have at least two points");
    if (!(level > 0.0) || !(level < 1.0)) throw UsageError("cate_curve: level must be in (0, 1)");

    CateCurve curve;
    curve.level = level;
    const double z = normal_quantile(0.5 + level / 2.0);
    const double lo = basis.boundary_low;
    const double hi = basis.boundary_high;
    for (std::size_t i = 0; i < grid_count; ++i) {
        // clamp: lo + (hi - lo) can overshoot hi by one ulp
        const double x = std::clamp(
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_count - 1), lo, hi);
        const Eigen::RowVectorXd b = eval_basis(basis, x);
        const double est = b * proj.coef;
        const double var = std::max(0.0, (b * proj.cov * b.transpose())(0, 0));
        const double half = z * std::sqrt(var);
        curve.grid.push_back(x);
        curve.estimate.push_back(est);
        curve.band_low.push_back(est - half);
        curve.band_high.push_back(est + half);
    }
    return curve;
}

// Convenience pipeline: basis from the covariate, projection, curve.
inline CateCurve estimate_cate(const std::vector<double>& x, const Eigen::VectorXd& psi_b,
                               int df = 5, int degree = 3, std::size_t grid_count = 100,
                               double level = 0.95) {
    const SplineBasis basis = build_basis(x, df, degree);
    const Eigen::MatrixXd B = basis_matrix(basis, x);
    const CateProjection proj = project_cate(psi_b, B);
    return cate_curve(proj, basis, grid_count, level);
}

}  // namespace causalkit
