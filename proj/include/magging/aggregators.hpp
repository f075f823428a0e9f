#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "estimators.hpp"
#include "linalg.hpp"
#include "nnls.hpp"
#include "parallel.hpp"
#include "simplex_qp.hpp"

namespace magging {

/// theta = sum_g weights_g * theta_g, plus the scheme's diagnostics.
struct AggregationResult {
    std::string scheme;
    Vector theta;
    double intercept = 0.0;
    Vector weights;
    bool simplex = false;
    std::map<std::string, double> diagnostics;
};

enum class StackConstraint { Ridge, Sign, Convex };
enum class LeaveOut { LeaveOneOut, OutOfBag };

struct StackingConfig {
    StackConstraint constraint = StackConstraint::Convex;
    double radius = 1.0; // ridge constraint only
    LeaveOut leaveout = LeaveOut::LeaveOneOut;

    void validate() const
    {
        if (constraint == StackConstraint::Ridge)
            detail::require(radius > 0.0 && std::isfinite(radius), "stacking: ridge radius must be > 0");
    }

    std::string name() const
    {
        std::string s = "stack:";
        switch (constraint) {
        case StackConstraint::Ridge: s += "ridge:" + std::to_string(radius); break;
        case StackConstraint::Sign: s += "sign"; break;
        case StackConstraint::Convex: s += "convex"; break;
        }
        s += leaveout == LeaveOut::LeaveOneOut ? "/loo" : "/oob";
        return s;
    }
};

namespace detail {

inline AggregationResult combine(const Ensemble& ens, std::string scheme, Vector weights, bool simplex)
{
    require(ens.size() >= 1, "aggregation: empty ensemble");
    require(weights.size() == ens.size(), "aggregation: weight count differs from ensemble size");
    AggregationResult out;
    out.scheme = std::move(scheme);
    out.theta = Vector::Zero(ens.dim());
    for (Index g = 0; g < ens.size(); ++g) {
        out.theta += weights(g) * ens.thetas[static_cast<std::size_t>(g)];
        if (!ens.intercepts.empty()) out.intercept += weights(g) * ens.intercepts[static_cast<std::size_t>(g)];
    }
    out.weights = std::move(weights);
    out.simplex = simplex;
    return out;
}

} // namespace detail

/// Uniform weights 1/G.
inline AggregationResult mean_aggregate(const Ensemble& ens)
{
    detail::require(ens.size() >= 1, "mean_aggregate: empty ensemble");
    return detail::combine(ens, "mean", Vector::Constant(ens.size(), 1.0 / static_cast<double>(ens.size())), true);
}

/// Convex weights minimising ||F w||_2 for the n x G matrix of fitted values F.
/// H = F^T F / n; the scaling leaves the minimiser unchanged.
inline SimplexWeights magging_weights(const Eigen::Ref<const Matrix>& fitted, const QpOptions& opts = {})
{
    detail::require(fitted.cols() >= 1 && fitted.rows() >= 1, "magging: no fitted values");
    detail::require(fitted.allFinite(), "magging: non-finite fitted values");
    QpProblem prob;
    prob.hessian = linalg::gram(fitted, true);
    return solve_simplex_qp(prob, opts);
}

/// Maximin aggregation. The weights depend only on the members' fitted
/// values; the response is deliberately not an argument.
inline AggregationResult magging_aggregate(const Ensemble& ens, const QpOptions& opts = {})
{
    detail::require(ens.size() >= 1, "magging: empty ensemble");
    detail::require(static_cast<Index>(ens.fitted.size()) == ens.size(), "magging: ensemble has no fitted values");
    const Matrix f = ens.fitted_matrix();
    const bool degenerate = f.cwiseAbs().maxCoeff() == 0.0;
    SimplexWeights sw;
    if (degenerate) {
        sw.w = Vector::Constant(ens.size(), 1.0 / static_cast<double>(ens.size()));
    } else {
        sw = magging_weights(f, opts);
    }
    auto out = detail::combine(ens, "magging", sw.w, true);
    out.diagnostics["objective"] = sw.objective;
    out.diagnostics["gap"] = sw.gap;
    out.diagnostics["xi"] = sw.regularization_used;
    out.diagnostics["iterations"] = static_cast<double>(sw.iterations);
    out.diagnostics["fitted_norm"] = (f * sw.w).norm();
    out.diagnostics["degenerate"] = degenerate ? 1.0 : 0.0;
    return out;
}

/// Magging with the fitted values recomputed on a user-supplied design.
inline AggregationResult magging_aggregate(const Ensemble& ens, const Eigen::Ref<const Matrix>& reference, const QpOptions& opts = {})
{
    Ensemble copy = ens;
    copy.fitted.clear();
    for (std::size_t g = 0; g < ens.thetas.size(); ++g)
        copy.fitted.push_back(fitted_values(reference, ens.thetas[g], ens.intercepts.empty() ? 0.0 : ens.intercepts[g]));
    return magging_aggregate(copy, opts);
}

/// n x G matrix of leave-out predictions: column g holds member g's
/// prediction for every sample, with samples of G_g predicted either by a
/// refit without that sample (leave-one-out) or by zero (out-of-bag).
inline Matrix leaveout_predictions(const Ensemble& ens, const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                                   LeaveOut scheme)
{
    detail::require(ens.size() >= 1, "stacking: empty ensemble");
    detail::require(x.rows() == y.size(), "stacking: X and Y row counts differ");
    detail::require(ens.grouping.n == x.rows() && ens.grouping.size() == ens.size(),
                    "stacking: ensemble grouping does not match the data");
    const Index n = x.rows();
    Matrix pred(n, ens.size());
    for (Index g = 0; g < ens.size(); ++g)
        pred.col(g) = fitted_values(x, ens.thetas[static_cast<std::size_t>(g)],
                                    ens.intercepts.empty() ? 0.0 : ens.intercepts[static_cast<std::size_t>(g)]);

    if (scheme == LeaveOut::OutOfBag) {
        for (Index g = 0; g < ens.size(); ++g)
            for (Index i : ens.grouping.groups[static_cast<std::size_t>(g)]) pred(i, g) = 0.0;
        return pred;
    }

    struct Task {
        Index group;
        std::size_t position;
    };
    std::vector<Task> tasks;
    for (Index g = 0; g < ens.size(); ++g)
        for (std::size_t k = 0; k < ens.grouping.groups[static_cast<std::size_t>(g)].size(); ++k) tasks.push_back({g, k});
    std::vector<double> values(tasks.size());

    parallel_for(tasks.size(), [&](std::size_t t) {
        const auto& idx = ens.grouping.groups[static_cast<std::size_t>(tasks[t].group)];
        const Index left_out = idx[tasks[t].position];
        IndexSet rest;
        rest.reserve(idx.size() - 1);
        for (std::size_t k = 0; k < idx.size(); ++k)
            if (k != tasks[t].position) rest.push_back(idx[k]);
        if (rest.empty())
            throw EstimatorError("leave-one-out: group " + std::to_string(tasks[t].group) + " has a single sample");
        try {
            const FitResult f = fit_group(linalg::select_rows(x, rest), linalg::select_entries(y, rest), ens.spec);
            values[t] = x.row(left_out).dot(f.theta) + f.intercept;
        } catch (const Error& e) {
            throw EstimatorError("leave-one-out refit failed for sample " + std::to_string(left_out) + " in group "
                                 + std::to_string(tasks[t].group) + ": " + e.what());
        }
    });
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& idx = ens.grouping.groups[static_cast<std::size_t>(tasks[t].group)];
        pred(idx[tasks[t].position], tasks[t].group) = values[t];
    }
    return pred;
}

/// Stacking weights for a given matrix of leave-out predictions.
inline Vector stacking_weights(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Vector>& y, const StackingConfig& cfg,
                               std::map<std::string, double>* diagnostics = nullptr, const QpOptions& opts = {})
{
    cfg.validate();
    detail::require(pred.rows() == y.size(), "stacking: prediction and response lengths differ");
    Vector w;
    switch (cfg.constraint) {
    case StackConstraint::Convex: {
        // ||Y - P w||^2 / n = w^T (P^T P / n) w - 2 (P^T Y / n)^T w + const.
        const double inv_n = 1.0 / static_cast<double>(pred.rows());
        QpProblem prob;
        prob.hessian = linalg::gram(pred, true);
        prob.linear = Vector(-(pred.transpose() * y) * inv_n);
        const SimplexWeights sw = solve_simplex_qp(prob, opts);
        w = sw.w;
        if (diagnostics) {
            (*diagnostics)["gap"] = sw.gap;
            (*diagnostics)["xi"] = sw.regularization_used;
            (*diagnostics)["iterations"] = static_cast<double>(sw.iterations);
        }
        break;
    }
    case StackConstraint::Sign: w = nnls(pred, y).x; break;
    case StackConstraint::Ridge: w = norm_constrained_lsq(pred, y, cfg.radius).x; break;
    }
    if (diagnostics) (*diagnostics)["residual"] = (y - pred * w).norm();
    return w;
}

/// Stacked aggregation: weights minimising ||Y - sum_g w_g Yhat_leaveout(g)||
/// over the configured constraint set, applied to the full-group fits.
inline AggregationResult stacked_aggregate(const Ensemble& ens, const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                                           const StackingConfig& cfg, const QpOptions& opts = {})
{
    cfg.validate();
    const Matrix pred = leaveout_predictions(ens, x, y, cfg.leaveout);
    std::map<std::string, double> diag;
    Vector w = stacking_weights(pred, y, cfg, &diag, opts);
    auto out = detail::combine(ens, cfg.name(), std::move(w), cfg.constraint == StackConstraint::Convex);
    out.diagnostics = std::move(diag);
    return out;
}

/// Wraps a pooled fit as an aggregation result (no weights).
inline AggregationResult pooled_result(const FitResult& fit)
{
    AggregationResult out;
    out.scheme = "pooled";
    out.theta = fit.theta;
    out.intercept = fit.intercept;
    out.weights = Vector(0);
    out.diagnostics["lambda"] = fit.lambda;
    out.diagnostics["converged"] = fit.converged ? 1.0 : 0.0;
    return out;
}

/// X_new * theta (+ intercept).
inline Vector predict(const Eigen::Ref<const Vector>& theta, const Eigen::Ref<const Matrix>& x_new, double intercept = 0.0)
{
    detail::require(x_new.cols() == theta.size(), "predict: X has " + std::to_string(x_new.cols())
                                                      + " columns but theta has length " + std::to_string(theta.size()));
    return fitted_values(x_new, theta, intercept);
}

inline Vector predict(const AggregationResult& r, const Eigen::Ref<const Matrix>& x_new)
{
    return predict(r.theta, x_new, r.intercept);
}

} // namespace magging
