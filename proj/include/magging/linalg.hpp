#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace magging {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

namespace linalg {

/// Validation tolerances shared by every module that accepts a covariance
/// or Hessian matrix.
inline constexpr double kSymmetryRelTol = 1e-12;
inline constexpr double kPsdTraceTol = 1e-10;

inline bool all_finite(const Eigen::Ref<const Matrix>& m)
{
    return m.allFinite();
}

/// X^T X, divided by the row count when `scale_by_n` is set. The upper
/// triangle is mirrored into the lower one so the result is exactly
/// symmetric.
inline Matrix gram(const Eigen::Ref<const Matrix>& x, bool scale_by_n)
{
    detail::require(x.rows() >= 1 && x.cols() >= 1, "gram: empty design matrix");
    Matrix g = x.transpose() * x;
    if (scale_by_n) g /= static_cast<double>(x.rows());
    g.triangularView<Eigen::StrictlyLower>() = g.transpose();
    return g;
}

/// v^T S v, clamped at zero for round-off negatives.
inline double sigma_norm_sq(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const Matrix>& s)
{
    detail::require(s.rows() == s.cols() && s.rows() == v.size(),
                    "sigma_norm_sq: dimension mismatch (v has " + std::to_string(v.size())
                        + ", S is " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) + ")");
    const double q = v.dot(s * v);
    return std::max(q, 0.0);
}

inline bool is_symmetric(const Eigen::Ref<const Matrix>& s)
{
    if (s.rows() != s.cols()) return false;
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    return (s - s.transpose()).cwiseAbs().maxCoeff() <= kSymmetryRelTol * scale;
}

/// Symmetric and every eigenvalue >= -1e-10 * trace.
inline bool is_psd(const Eigen::Ref<const Matrix>& s)
{
    if (!s.allFinite() || !is_symmetric(s)) return false;
    if (s.rows() == 0) return true;
    const Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    const double floor = -kPsdTraceTol * std::max(std::abs(sym.trace()), 1e-300);
    return es.eigenvalues().minCoeff() >= floor;
}

/// Euclidean projection onto {w : w >= 0, sum w = 1} by sort-and-threshold.
inline Vector project_simplex(const Eigen::Ref<const Vector>& v)
{
    detail::require(v.size() > 0, "project_simplex: empty vector");
    detail::require(v.allFinite(), "project_simplex: non-finite entry");
    const Eigen::Index n = v.size();

    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double tau = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        cumsum += u[k];
        const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) tau = t;
    }
    Vector w = (v.array() - tau).cwiseMax(0.0);
    // Re-normalise away the rounding left in tau.
    const double s = w.sum();
    if (s > 0.0) w /= s;
    return w;
}

/// Max absolute entry of A - B.
inline double max_abs_diff(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b)
{
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff: dimension mismatch");
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

/// Rows `idx` of x, in the given order.
inline Matrix select_rows(const Eigen::Ref<const Matrix>& x, const std::vector<Eigen::Index>& idx)
{
    Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(idx[r]);
    return out;
}

/// Entries `idx` of y, in the given order.
inline Vector select_entries(const Eigen::Ref<const Vector>& y, const std::vector<Eigen::Index>& idx)
{
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = y(idx[r]);
    return out;
}

} // namespace linalg
} // namespace magging
