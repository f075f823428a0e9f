#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "grouping.hpp"
#include "linalg.hpp"
#include "parallel.hpp"

namespace magging {

enum class EstimatorKind { OLS, Ridge, Lasso };

inline std::string to_string(EstimatorKind k)
{
    switch (k) {
    case EstimatorKind::OLS: return "ols";
    case EstimatorKind::Ridge: return "ridge";
    case EstimatorKind::Lasso: return "lasso";
    }
    return "unknown";
}

/// Per-group regression estimator. For Lasso an unset lambda means the
/// default rule lambda = sd(Y_g) * sqrt(log p / |G_g|).
struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::Lasso;
    std::optional<double> lambda;
    double tolerance = 1e-8;
    long max_iterations = 100000;
    bool intercept = false;
    bool standardize = false;

    static EstimatorSpec ols() { return {EstimatorKind::OLS, 0.0}; }
    static EstimatorSpec ridge(double lambda) { return {EstimatorKind::Ridge, lambda}; }
    static EstimatorSpec lasso(std::optional<double> lambda = std::nullopt) { return {EstimatorKind::Lasso, lambda}; }

    void validate() const
    {
        if (lambda) detail::require(std::isfinite(*lambda) && *lambda >= 0.0, "estimator: lambda must be >= 0");
        detail::require(kind != EstimatorKind::Ridge || lambda.has_value(), "estimator: ridge requires lambda");
        detail::require(tolerance > 0.0, "estimator: tolerance must be > 0");
        detail::require(max_iterations >= 1, "estimator: max_iterations must be >= 1");
    }
};

/// Largest condition estimate of X^T X accepted for OLS.
inline constexpr double kMaxOlsCondition = 1e12;

struct FitResult {
    Vector theta;
    double intercept = 0.0;
    double lambda = 0.0;
    long iterations = 0;
    bool converged = true;
};

inline double default_lasso_lambda(const Eigen::Ref<const Vector>& y, Index p)
{
    const Index m = y.size();
    if (m < 2 || p < 2) return 0.0;
    const double mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().sum() / static_cast<double>(m - 1));
    return sd * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(m));
}

inline double soft_threshold(double z, double gamma)
{
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

namespace detail {

inline Vector solve_ols(const Matrix& x, const Vector& y)
{
    const Matrix xtx = linalg::gram(x, false);
    Eigen::LLT<Matrix> llt(xtx);
    const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
    if (!(rcond > 0.0) || 1.0 / rcond > kMaxOlsCondition) {
        throw EstimatorError("OLS: X^T X is singular or ill-conditioned (condition estimate "
                             + (rcond > 0.0 ? std::to_string(1.0 / rcond) : std::string("inf"))
                             + "); use ridge or lasso");
    }
    Vector theta = llt.solve(x.transpose() * y);
    // One step of iterative refinement against the normal equations.
    const Vector r = x.transpose() * (y - x * theta);
    theta += llt.solve(r);
    return theta;
}

inline Vector solve_ridge(const Matrix& x, const Vector& y, double lambda)
{
    Matrix a = linalg::gram(x, false);
    a.diagonal().array() += lambda * static_cast<double>(x.rows());
    Eigen::LDLT<Matrix> ldlt(a);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 0.0))
        throw EstimatorError("ridge: system is singular (lambda = " + std::to_string(lambda) + ")");
    return ldlt.solve(x.transpose() * y);
}

// Cyclic coordinate descent on (2m)^-1 ||y - X theta||^2 + lambda ||theta||_1.
// Converged once a full sweep moves no coefficient by more than `tol` and
// the KKT conditions hold to within `tol`.
inline FitResult solve_lasso(const Matrix& x, const Vector& y, double lambda, double tol, long max_iterations)
{
    const Index m = x.rows();
    const Index p = x.cols();
    const double inv_m = 1.0 / static_cast<double>(m);

    Vector col_sq(p);
    for (Index j = 0; j < p; ++j) col_sq(j) = x.col(j).squaredNorm() * inv_m;

    FitResult out;
    out.theta = Vector::Zero(p);
    out.lambda = lambda;
    out.converged = false;
    Vector resid = y;

    for (long it = 1; it <= max_iterations; ++it) {
        double max_change = 0.0;
        for (Index j = 0; j < p; ++j) {
            if (col_sq(j) <= 0.0) continue;
            const double old = out.theta(j);
            const double z = x.col(j).dot(resid) * inv_m + col_sq(j) * old;
            const double updated = soft_threshold(z, lambda) / col_sq(j);
            const double delta = updated - old;
            if (delta != 0.0) {
                resid.noalias() -= delta * x.col(j);
                out.theta(j) = updated;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        out.iterations = it;
        if (max_change < tol) {
            const Vector grad = x.transpose() * resid * inv_m;
            double violation = 0.0;
            for (Index j = 0; j < p; ++j) {
                const double v = out.theta(j) == 0.0 ? std::abs(grad(j)) - lambda
                                                     : std::abs(grad(j) - lambda * (out.theta(j) > 0 ? 1.0 : -1.0));
                violation = std::max(violation, v);
            }
            if (violation <= tol) {
                out.converged = true;
                break;
            }
        }
    }
    return out;
}

} // namespace detail

/// Fits one group. OLS throws EstimatorError on an ill-conditioned design;
/// Lasso reports non-convergence through FitResult::converged.
inline FitResult fit_group(const Eigen::Ref<const Matrix>& xg, const Eigen::Ref<const Vector>& yg, const EstimatorSpec& spec)
{
    spec.validate();
    detail::require(xg.rows() == yg.size(), "fit_group: X has " + std::to_string(xg.rows()) + " rows but Y has "
                                                + std::to_string(yg.size()));
    detail::require(xg.rows() >= 1 && xg.cols() >= 1, "fit_group: empty design");
    detail::require(xg.allFinite() && yg.allFinite(), "fit_group: non-finite data");

    const Index m = xg.rows();
    const Index p = xg.cols();
    Matrix x = xg;
    Vector y = yg;

    Vector x_mean = Vector::Zero(p);
    double y_mean = 0.0;
    if (spec.intercept) {
        x_mean = x.colwise().mean().transpose();
        y_mean = y.mean();
        x.rowwise() -= x_mean.transpose();
        y.array() -= y_mean;
    }
    Vector scale = Vector::Ones(p);
    if (spec.standardize) {
        for (Index j = 0; j < p; ++j) {
            const double s = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(m));
            if (s > 0.0) {
                scale(j) = s;
                x.col(j) /= s;
            }
        }
    }

    FitResult out;
    switch (spec.kind) {
    case EstimatorKind::OLS:
        out.theta = detail::solve_ols(x, y);
        break;
    case EstimatorKind::Ridge:
        out.lambda = *spec.lambda;
        out.theta = detail::solve_ridge(x, y, out.lambda);
        break;
    case EstimatorKind::Lasso: {
        const double lambda = spec.lambda ? *spec.lambda : default_lasso_lambda(y, p);
        out = detail::solve_lasso(x, y, lambda, spec.tolerance, spec.max_iterations);
        break;
    }
    }

    out.theta.array() /= scale.array();
    if (spec.intercept) out.intercept = y_mean - x_mean.dot(out.theta);
    return out;
}

/// Ensemble of per-group fits together with their fitted values on a
/// reference design (all n rows of the data by default).
struct Ensemble {
    std::vector<Vector> thetas;
    std::vector<double> intercepts;
    std::vector<Vector> fitted;
    std::vector<FitResult> fits;
    Grouping grouping;
    EstimatorSpec spec;

    Index size() const { return static_cast<Index>(thetas.size()); }
    Index dim() const { return thetas.empty() ? 0 : thetas.front().size(); }

    /// n x G matrix with fitted[g] as column g.
    Matrix fitted_matrix() const
    {
        if (fitted.empty()) return Matrix(0, 0);
        Matrix f(fitted.front().size(), static_cast<Index>(fitted.size()));
        for (std::size_t g = 0; g < fitted.size(); ++g) f.col(static_cast<Index>(g)) = fitted[g];
        return f;
    }

    /// p x G matrix with thetas[g] as column g.
    Matrix theta_matrix() const
    {
        Matrix t(dim(), size());
        for (Index g = 0; g < size(); ++g) t.col(g) = thetas[static_cast<std::size_t>(g)];
        return t;
    }

    bool all_converged() const
    {
        for (const auto& f : fits)
            if (!f.converged) return false;
        return true;
    }
};

/// Fitted values of a coefficient vector (plus intercept) on x.
inline Vector fitted_values(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& theta, double intercept = 0.0)
{
    detail::require(x.cols() == theta.size(), "fitted_values: dimension mismatch");
    Vector f = x * theta;
    if (intercept != 0.0) f.array() += intercept;
    return f;
}

/// Builds an ensemble from a fixed list of coefficient vectors.
inline Ensemble make_ensemble(const Eigen::Ref<const Matrix>& reference, std::vector<Vector> thetas, Grouping grouping = {},
                              EstimatorSpec spec = {})
{
    Ensemble ens;
    ens.thetas = std::move(thetas);
    ens.intercepts.assign(ens.thetas.size(), 0.0);
    for (const auto& t : ens.thetas) {
        ens.fitted.push_back(fitted_values(reference, t));
        FitResult f;
        f.theta = t;
        ens.fits.push_back(std::move(f));
    }
    ens.grouping = std::move(grouping);
    ens.spec = spec;
    return ens;
}

/// Fits every group and evaluates the fits on `reference` (the full X when
/// not given). Groups are fitted in parallel; output is identical to a
/// sequential run.
inline Ensemble fit_ensemble(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, const Grouping& grouping,
                             const EstimatorSpec& spec, const Matrix* reference = nullptr)
{
    spec.validate();
    detail::require(x.rows() == y.size(), "fit_ensemble: X and Y row counts differ");
    detail::require(grouping.n == x.rows(), "fit_ensemble: grouping.n (" + std::to_string(grouping.n)
                                                + ") differs from the number of rows (" + std::to_string(x.rows()) + ")");
    grouping.validate();
    const Matrix design = reference ? *reference : Matrix(x);
    detail::require(design.cols() == x.cols(), "fit_ensemble: reference design has the wrong column count");

    const auto num_groups = grouping.groups.size();
    Ensemble ens;
    ens.grouping = grouping;
    ens.spec = spec;
    ens.fits.resize(num_groups);
    parallel_for(num_groups, [&](std::size_t g) {
        try {
            const auto& idx = grouping.groups[g];
            const Matrix xg = linalg::select_rows(x, idx);
            const Vector yg = linalg::select_entries(y, idx);
            ens.fits[g] = fit_group(xg, yg, spec);
        } catch (const Error& e) {
            throw EstimatorError("group " + std::to_string(g) + ": " + e.what());
        }
    });
    Matrix thetas(x.cols(), static_cast<Index>(num_groups));
    for (std::size_t g = 0; g < num_groups; ++g) {
        ens.thetas.push_back(ens.fits[g].theta);
        ens.intercepts.push_back(ens.fits[g].intercept);
        thetas.col(static_cast<Index>(g)) = ens.fits[g].theta;
    }
    // One product instead of G passes over the design.
    const Matrix fitted = design * thetas;
    for (std::size_t g = 0; g < num_groups; ++g)
        ens.fitted.push_back(fitted.col(static_cast<Index>(g)).array() + ens.intercepts[g]);
    return ens;
}

/// Single fit on all rows.
inline FitResult fit_pooled(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, const EstimatorSpec& spec)
{
    return fit_group(x, y, spec);
}

} // namespace magging
