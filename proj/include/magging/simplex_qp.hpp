#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "error.hpp"
#include "linalg.hpp"

namespace magging {

/// min_{w in simplex} w^T H w + 2 c^T w, with H symmetric PSD (G x G).
struct QpProblem {
    Matrix hessian;
    std::optional<Vector> linear;

    Index size() const { return hessian.rows(); }

    double objective(const Eigen::Ref<const Vector>& w) const
    {
        double f = w.dot(hessian * w);
        if (linear) f += 2.0 * linear->dot(w);
        return f;
    }

    /// Gradient 2 H w + 2 c.
    Vector gradient(const Eigen::Ref<const Vector>& w) const
    {
        Vector g = 2.0 * (hessian * w);
        if (linear) g += 2.0 * *linear;
        return g;
    }
};

struct SimplexWeights {
    Vector w;
    double objective = 0.0;
    long iterations = 0;
    double regularization_used = 0.0;
    double gap = 0.0;
};

struct QpOptions {
    /// Required duality gap, relative to max(1, max_g H_gg).
    double tol = 1e-9;
    long max_iterations = 1000000;
};

inline constexpr double kSimplexNegTol = 1e-12;
inline constexpr double kSimplexSumTol = 1e-10;

inline bool is_simplex_feasible(const Eigen::Ref<const Vector>& w)
{
    return w.size() > 0 && w.allFinite() && w.minCoeff() >= -kSimplexNegTol && std::abs(w.sum() - 1.0) <= kSimplexSumTol;
}

/// Frank-Wolfe gap grad^T w - min_g grad_g. Non-negative, zero exactly at
/// an optimum, and an upper bound on f(w) - f(w*).
inline double duality_gap(const QpProblem& prob, const Eigen::Ref<const Vector>& w)
{
    detail::require(w.size() == prob.size(), "duality_gap: weight vector has the wrong length");
    detail::require(is_simplex_feasible(w), "duality_gap: weights are not in the simplex");
    const Vector g = prob.gradient(w);
    return std::max(0.0, g.dot(w) - g.minCoeff());
}

inline double duality_gap(const QpProblem& prob, const SimplexWeights& sw)
{
    return duality_gap(prob, sw.w);
}

namespace detail {

inline void validate_qp(const QpProblem& prob)
{
    const Index g = prob.size();
    require(g >= 1 && prob.hessian.cols() == g, "simplex QP: Hessian must be a non-empty square matrix");
    if (!prob.hessian.allFinite()) throw InputError("simplex QP: non-finite Hessian entry");
    if (prob.linear) {
        require(prob.linear->size() == g, "simplex QP: linear term has the wrong length");
        if (!prob.linear->allFinite()) throw InputError("simplex QP: non-finite linear term");
    }
    if (!linalg::is_psd(prob.hessian)) throw InputError("simplex QP: Hessian is not symmetric positive semi-definite");
}

// Equality-constrained minimiser of 1/2 w^T Q w + d^T w over the free
// coordinates with sum(w_F) = 1 (null-space method).
inline Vector solve_face(const Matrix& q, const Vector& d, const std::vector<Index>& free)
{
    const auto k = static_cast<Index>(free.size());
    Vector wf = Vector::Constant(k, 1.0 / static_cast<double>(k));
    if (k == 1) return wf;
    Matrix qf(k, k);
    Vector df(k);
    for (Index a = 0; a < k; ++a) {
        df(a) = d(free[a]);
        for (Index b = 0; b < k; ++b) qf(a, b) = q(free[a], free[b]);
    }
    // Basis of {z : sum z = 0}: columns e_a - e_{k-1}.
    Matrix z = Matrix::Zero(k, k - 1);
    z.topRows(k - 1).setIdentity();
    z.row(k - 1).setConstant(-1.0);
    const Matrix reduced = z.transpose() * qf * z;
    const Vector rhs = -(z.transpose() * (qf * wf + df));
    Eigen::LDLT<Matrix> ldlt(reduced);
    return wf + z * ldlt.solve(rhs);
}

// Primal active-set method for the strictly convex problem
// min 1/2 w^T Q w + d^T w on the simplex, warm-started from a feasible w.
// Returns nullopt if it does not terminate within its step budget.
inline std::optional<Vector> active_set_polish(const Matrix& q, const Vector& d, Vector w)
{
    const Index n = w.size();
    std::vector<bool> fixed(static_cast<std::size_t>(n));
    for (Index g = 0; g < n; ++g) fixed[g] = w(g) <= 0.0;
    const double scale = std::max(1.0, q.diagonal().cwiseAbs().maxCoeff() + d.cwiseAbs().maxCoeff());
    const double mult_tol = 1e-13 * scale;

    const long budget = 20 * n + 100;
    for (long step = 0; step < budget; ++step) {
        std::vector<Index> free;
        for (Index g = 0; g < n; ++g)
            if (!fixed[g]) free.push_back(g);
        if (free.empty()) return std::nullopt;

        const Vector target = solve_face(q, d, free);
        if (!target.allFinite()) return std::nullopt;

        double alpha = 1.0;
        Index blocking = -1;
        for (std::size_t a = 0; a < free.size(); ++a) {
            const Index g = free[a];
            const double dir = target(static_cast<Index>(a)) - w(g);
            if (target(static_cast<Index>(a)) < 0.0 && dir < 0.0) {
                const double ratio = -w(g) / dir;
                if (ratio < alpha) {
                    alpha = ratio;
                    blocking = g;
                }
            }
        }
        for (std::size_t a = 0; a < free.size(); ++a) {
            const Index g = free[a];
            w(g) += alpha * (target(static_cast<Index>(a)) - w(g));
        }
        if (blocking >= 0) {
            w(blocking) = 0.0;
            fixed[blocking] = true;
            continue;
        }

        // Stationary on the face; check the multipliers of the fixed bounds.
        const Vector grad = q * w + d;
        double lambda = 0.0;
        for (Index g : free) lambda += grad(g);
        lambda /= static_cast<double>(free.size());
        Index worst = -1;
        double worst_mu = -mult_tol;
        for (Index g = 0; g < n; ++g) {
            if (!fixed[g]) continue;
            const double mu = grad(g) - lambda;
            if (mu < worst_mu) {
                worst_mu = mu;
                worst = g;
            }
        }
        if (worst < 0) {
            for (Index g = 0; g < n; ++g)
                if (fixed[g]) w(g) = 0.0;
            return w;
        }
        fixed[worst] = false;
    }
    return std::nullopt;
}

} // namespace detail

/// Minimises w^T H w + 2 c^T w over the probability simplex.
///
/// The iteration is an accelerated projected gradient (FISTA with adaptive
/// restart, step 1/L where L bounds the Gershgorin radius of 2H), finished by
/// a primal active-set solve on the face the iterates identify. Both run on
/// H + xi I with xi = max(1e-10, 1e-12 trace H), which selects the minimiser
/// of smallest Euclidean norm when the original problem has several. The
/// returned weights are certified by the Frank-Wolfe gap of the original
/// (unregularised) problem: gap <= tol * max(1, max_g H_gg).
inline SimplexWeights solve_simplex_qp(const QpProblem& prob, const QpOptions& opts = {})
{
    detail::validate_qp(prob);
    detail::require(opts.tol > 0.0, "simplex QP: tol must be > 0");
    detail::require(opts.max_iterations >= 1, "simplex QP: max_iterations must be >= 1");

    const Index n = prob.size();
    SimplexWeights out;
    if (n == 1) {
        out.w = Vector::Ones(1);
        out.objective = prob.objective(out.w);
        return out;
    }

    const double xi = std::max(1e-10, 1e-12 * prob.hessian.trace());
    out.regularization_used = xi;
    Matrix hr = 0.5 * (prob.hessian + prob.hessian.transpose());
    hr.diagonal().array() += xi;
    const Vector c = prob.linear ? *prob.linear : Vector::Zero(n);
    const Matrix q = 2.0 * hr;
    const Vector d = 2.0 * c;
    auto grad_reg = [&](const Vector& w) -> Vector { return q * w + d; };
    auto gap_of = [](const Vector& g, const Vector& w) { return std::max(0.0, g.dot(w) - g.minCoeff()); };

    const double certify = opts.tol * std::max(1.0, prob.hessian.diagonal().maxCoeff());
    const double lipschitz = std::max(q.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);

    Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
    Vector y = w;
    double t = 1.0;
    long iter = 0;

    auto finish = [&](const Vector& cand) -> bool {
        Vector wc = cand.cwiseMax(0.0);
        wc /= wc.sum();
        const double gap = duality_gap(prob, wc);
        if (gap <= certify) {
            out.w = wc;
            out.gap = gap;
            out.objective = prob.objective(wc);
            out.iterations = iter;
            return true;
        }
        return false;
    };

    auto polish = [&]() -> bool {
        Vector start = w;
        const double cut = 1e-9 / static_cast<double>(n);
        for (Index g = 0; g < n; ++g)
            if (start(g) < cut) start(g) = 0.0;
        start /= start.sum();
        const auto polished = detail::active_set_polish(q, d, start);
        return polished && finish(*polished);
    };

    long next_polish = std::min<long>(opts.max_iterations, 50 + 10 * n);
    while (true) {
        const bool small_gap = gap_of(grad_reg(w), w) <= 0.5 * certify;
        if (small_gap || iter >= next_polish) {
            // The active-set result is the exact regularised minimiser, so it
            // carries the minimum-norm selection; prefer it over the iterate.
            if (polish()) return out;
            if (small_gap && finish(w)) return out;
            next_polish = std::min<long>(opts.max_iterations, iter + std::max<long>(1000, iter));
        }
        if (iter >= opts.max_iterations) break;

        const Vector gy = grad_reg(y);
        const Vector w_next = linalg::project_simplex(y - gy / lipschitz);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        if (gy.dot(w_next - w) > 0.0) {
            // Adaptive restart: momentum points uphill.
            t = 1.0;
            y = w_next;
        } else {
            y = w_next + ((t - 1.0) / t_next) * (w_next - w);
            t = t_next;
        }
        w = w_next;
        ++iter;
    }

    throw SolverError("simplex QP: no certified solution after " + std::to_string(opts.max_iterations)
                      + " iterations (gap " + std::to_string(duality_gap(prob, w)) + ", required "
                      + std::to_string(certify) + ")");
}

} // namespace magging
