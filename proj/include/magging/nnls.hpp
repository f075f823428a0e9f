#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "linalg.hpp"

namespace magging {

struct LsqResult {
    Vector x;
    long iterations = 0;
    double residual_norm = 0.0;
};

/// Non-negative least squares, min ||A x - b||_2 subject to x >= 0, by the
/// Lawson-Hanson active-set method.
inline LsqResult nnls(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Vector>& b, long max_iterations = 0)
{
    detail::require(a.rows() == b.size(), "nnls: A and b row counts differ");
    detail::require(a.allFinite() && b.allFinite(), "nnls: non-finite input");
    const Index n = a.cols();
    if (max_iterations <= 0) max_iterations = 30 * std::max<Index>(n, 1) + 100;

    const double tol = 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, a.cwiseAbs().maxCoeff())
                       * std::max(1.0, b.cwiseAbs().maxCoeff()) * static_cast<double>(std::max<Index>(a.rows(), 1));

    LsqResult out;
    out.x = Vector::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);

    auto solve_passive = [&](Vector& z) {
        std::vector<Index> idx;
        for (Index j = 0; j < n; ++j)
            if (passive[j]) idx.push_back(j);
        z.setZero(n);
        if (idx.empty()) return;
        Matrix ap(a.rows(), static_cast<Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Index>(k)) = a.col(idx[k]);
        const Vector zp = ap.colPivHouseholderQr().solve(b);
        for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Index>(k));
    };

    Vector grad = a.transpose() * (b - a * out.x);
    while (out.iterations < max_iterations) {
        Index best = -1;
        double best_val = tol;
        for (Index j = 0; j < n; ++j) {
            if (!passive[j] && grad(j) > best_val) {
                best_val = grad(j);
                best = j;
            }
        }
        if (best < 0) break;
        passive[best] = true;

        Vector z;
        while (true) {
            ++out.iterations;
            solve_passive(z);
            bool feasible = true;
            for (Index j = 0; j < n; ++j)
                if (passive[j] && z(j) <= 0.0) feasible = false;
            if (feasible) break;

            double alpha = 1.0;
            for (Index j = 0; j < n; ++j) {
                if (passive[j] && z(j) <= 0.0) {
                    const double denom = out.x(j) - z(j);
                    if (denom > 0.0) alpha = std::min(alpha, out.x(j) / denom);
                }
            }
            out.x += alpha * (z - out.x);
            for (Index j = 0; j < n; ++j) {
                if (passive[j] && out.x(j) <= tol) {
                    passive[j] = false;
                    out.x(j) = 0.0;
                }
            }
            if (out.iterations >= max_iterations) throw SolverError("nnls: iteration limit reached");
        }
        out.x = z;
        grad = a.transpose() * (b - a * out.x);
    }
    out.residual_norm = (b - a * out.x).norm();
    return out;
}

/// min ||A x - b||_2 subject to ||x||_2 <= radius. Returns the minimum-norm
/// least-squares solution when it is inside the ball, otherwise the boundary
/// solution (A^T A + mu I)^-1 A^T b with mu found by bisection.
inline LsqResult norm_constrained_lsq(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Vector>& b, double radius)
{
    detail::require(a.rows() == b.size(), "norm_constrained_lsq: A and b row counts differ");
    detail::require(radius > 0.0 && std::isfinite(radius), "norm_constrained_lsq: radius must be > 0");

    LsqResult out;
    out.x = a.completeOrthogonalDecomposition().solve(b);
    if (out.x.norm() <= radius) {
        out.residual_norm = (b - a * out.x).norm();
        return out;
    }

    const Matrix ata = linalg::gram(a, false);
    const Vector atb = a.transpose() * b;
    auto solve_mu = [&](double mu) {
        Matrix m = ata;
        m.diagonal().array() += mu;
        return Vector(m.ldlt().solve(atb));
    };

    // ||x(mu)|| decreases monotonically in mu; bracket then bisect.
    double lo = 0.0;
    double hi = std::max(1.0, ata.diagonal().maxCoeff());
    while (solve_mu(hi).norm() > radius) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (solve_mu(mid).norm() > radius)
            lo = mid;
        else
            hi = mid;
        ++out.iterations;
    }
    out.x = solve_mu(hi);
    // Land exactly on the sphere.
    const double nrm = out.x.norm();
    if (nrm > radius) out.x *= radius / nrm;
    out.residual_norm = (b - a * out.x).norm();
    return out;
}

} // namespace magging
