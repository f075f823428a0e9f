#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aggregators.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "linalg.hpp"
#include "simplex_qp.hpp"

namespace magging {

/// Finite support {b_1, ..., b_k} of the coefficient distribution together
/// with the predictor covariance.
struct SupportSpec {
    std::vector<Vector> points;
    Matrix sigma;

    Index dim() const { return sigma.rows(); }

    void validate() const
    {
        detail::require(!points.empty(), "support: at least one point required");
        detail::require(sigma.rows() == sigma.cols() && sigma.rows() >= 1, "support: sigma must be square");
        for (std::size_t k = 0; k < points.size(); ++k) {
            detail::require(points[k].size() == sigma.rows(), "support: point " + std::to_string(k) + " has dimension "
                                                                  + std::to_string(points[k].size()) + ", sigma is "
                                                                  + std::to_string(sigma.rows()));
            detail::require(points[k].allFinite(), "support: non-finite point");
        }
        detail::require(linalg::is_psd(sigma), "support: sigma is not symmetric positive semi-definite");
    }

    /// p x k matrix with the points as columns.
    Matrix point_matrix() const
    {
        Matrix b(dim(), static_cast<Index>(points.size()));
        for (std::size_t k = 0; k < points.size(); ++k) b.col(static_cast<Index>(k)) = points[k];
        return b;
    }
};

/// Variance explained by beta when the truth is b: 2 beta' S b - beta' S beta.
inline double explained_variance(const Eigen::Ref<const Vector>& beta, const Eigen::Ref<const Vector>& b,
                                 const Eigen::Ref<const Matrix>& sigma)
{
    detail::require(beta.size() == b.size() && sigma.rows() == beta.size() && sigma.cols() == beta.size(),
                    "explained_variance: dimension mismatch");
    return 2.0 * beta.dot(sigma * b) - beta.dot(sigma * beta);
}

struct MaximinPoint {
    Vector point;
    Vector weights;
    double norm_sq = 0.0;
    double gap = 0.0;
};

/// Point of the convex hull of the support closest to zero in the sigma
/// norm, found as sum_g w_g b_g with w minimising w' (B' S B) w on the simplex.
inline MaximinPoint maximin_point(const SupportSpec& spec, const QpOptions& opts = {})
{
    spec.validate();
    const Matrix b = spec.point_matrix();
    QpProblem prob;
    prob.hessian = b.transpose() * spec.sigma * b;
    prob.hessian = 0.5 * (prob.hessian + prob.hessian.transpose());
    const SimplexWeights sw = solve_simplex_qp(prob, opts);
    MaximinPoint out;
    out.weights = sw.w;
    out.point = b * sw.w;
    out.norm_sq = linalg::sigma_norm_sq(out.point, spec.sigma);
    out.gap = sw.gap;
    return out;
}

struct GridOracleResult {
    Vector point;
    double value = 0.0;
    bool radius_too_small = false;
};

inline double default_grid_radius(const SupportSpec& spec)
{
    double r = 0.0;
    for (const auto& b : spec.points) r = std::max(r, b.cwiseAbs().maxCoeff());
    return r > 0.0 ? 1.5 * r : 1.0;
}

/// Brute-force minimiser of max_b -V(beta, b) over the grid
/// {-radius + k * step}^p, p <= 3. Ties go to the lexicographically
/// smallest grid point. A radius <= 0 selects the default
/// 1.5 * max_b ||b||_inf.
inline GridOracleResult maximin_by_definition(const SupportSpec& spec, double grid_step = 0.01, double radius = 0.0)
{
    spec.validate();
    const Index p = spec.dim();
    detail::require(p <= 3, "maximin_by_definition: brute-force oracle supports p <= 3 (got " + std::to_string(p) + ")");
    detail::require(grid_step > 0.0, "maximin_by_definition: grid step must be > 0");
    if (radius <= 0.0) radius = default_grid_radius(spec);

    GridOracleResult out;
    for (const auto& b : spec.points)
        if (b.cwiseAbs().maxCoeff() > radius) out.radius_too_small = true;

    std::vector<Vector> sb;
    for (const auto& b : spec.points) sb.push_back(spec.sigma * b);

    const auto steps = static_cast<long>(std::floor(2.0 * radius / grid_step + 1e-9));
    std::vector<long> counter(static_cast<std::size_t>(p), 0);
    Vector beta(p);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        for (Index j = 0; j < p; ++j) beta(j) = -radius + static_cast<double>(counter[j]) * grid_step;
        // max_b -V = beta' S beta - 2 min_b (S b)' beta
        double min_lin = std::numeric_limits<double>::infinity();
        for (const auto& v : sb) min_lin = std::min(min_lin, v.dot(beta));
        const double val = beta.dot(spec.sigma * beta) - 2.0 * min_lin;
        if (val < best) {
            best = val;
            out.point = beta;
        }
        Index j = p - 1;
        while (j >= 0 && ++counter[j] > steps) counter[j--] = 0;
        if (j < 0) break;
    }
    out.value = best;
    return out;
}

/// Maximin points before and after adding `new_point` to the support.
inline std::pair<MaximinPoint, MaximinPoint> robustness_delta(const SupportSpec& spec, const Eigen::Ref<const Vector>& new_point,
                                                              const QpOptions& opts = {})
{
    detail::require(new_point.size() == spec.dim(), "robustness_delta: dimension mismatch");
    MaximinPoint before = maximin_point(spec, opts);
    SupportSpec grown = spec;
    grown.points.push_back(new_point);
    MaximinPoint after = maximin_point(grown, opts);
    return {std::move(before), std::move(after)};
}

/// Empirical check of ||theta_magging - b_maximin||_S^2 <= 6 eta1 + 4 eta2 kappa^2.
struct BoundCertificate {
    double eta1 = 0.0;
    double eta2 = 0.0;
    double kappa = 0.0;
    double bound = 0.0;
    double lhs = 0.0;
    bool holds = false;
    Index min_group_size = 0;
    Vector b_maximin;
};

/// `truth.points` are the per-group optimal vectors b_g*, in ensemble order,
/// and `truth.sigma` is the population covariance; `x` is the design the
/// ensemble was fitted on.
inline BoundCertificate theorem1_certificate(const Ensemble& ens, const Eigen::Ref<const Matrix>& x, const SupportSpec& truth,
                                             const AggregationResult& magging_result, const QpOptions& opts = {})
{
    truth.validate();
    detail::require(static_cast<Index>(truth.points.size()) == ens.size(),
                    "certificate: " + std::to_string(truth.points.size()) + " true group vectors for an ensemble of "
                        + std::to_string(ens.size()));
    detail::require(ens.dim() == truth.dim() && x.cols() == truth.dim() && magging_result.theta.size() == truth.dim(),
                    "certificate: dimension mismatch");
    detail::require(ens.grouping.size() == ens.size() && ens.grouping.n == x.rows(),
                    "certificate: ensemble grouping does not match the design");

    BoundCertificate cert;
    for (Index g = 0; g < ens.size(); ++g) {
        const auto gi = static_cast<std::size_t>(g);
        const Vector err = ens.thetas[gi] - truth.points[gi];
        cert.eta1 = std::max(cert.eta1, linalg::sigma_norm_sq(err, truth.sigma));
        const Matrix gram_g = linalg::gram(linalg::select_rows(x, ens.grouping.groups[gi]), true);
        cert.eta2 = std::max(cert.eta2, linalg::max_abs_diff(gram_g, truth.sigma));
        cert.kappa = std::max({cert.kappa, truth.points[gi].lpNorm<1>(), ens.thetas[gi].lpNorm<1>()});
    }
    cert.min_group_size = ens.grouping.min_group_size();
    cert.bound = 6.0 * cert.eta1 + 4.0 * cert.eta2 * cert.kappa * cert.kappa;
    cert.b_maximin = maximin_point(truth, opts).point;
    cert.lhs = linalg::sigma_norm_sq(magging_result.theta - cert.b_maximin, truth.sigma);
    cert.holds = cert.lhs <= cert.bound;
    return cert;
}

} // namespace magging
