#pragma once

#include <cmath>
#include <limits>

#include <magging/linalg.hpp>
#include <magging/rng.hpp>

namespace magging::testing {

/// Random PSD matrix A A^T with A of size k x r, r <= k gives rank r.
inline Matrix random_psd(Rng& rng, Index k, Index rank)
{
    Matrix a(k, rank);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < rank; ++j) a(i, j) = rng.normal();
    Matrix h = a * a.transpose();
    return 0.5 * (h + h.transpose());
}

inline Matrix random_matrix(Rng& rng, Index rows, Index cols)
{
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

inline Vector random_vector(Rng& rng, Index n)
{
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

/// Random point of the simplex (normalised exponentials, i.e. uniform).
inline Vector random_simplex_point(Rng& rng, Index k)
{
    Vector w(k);
    for (Index i = 0; i < k; ++i) w(i) = -std::log(1.0 - rng.uniform());
    return w / w.sum();
}

/// Minimum of w' H w + 2 c' w over a simplex grid with the given step (k <= 3).
inline double simplex_grid_minimum(const Matrix& h, const Vector& c, double step)
{
    const Index k = h.rows();
    const auto steps = static_cast<long>(std::llround(1.0 / step));
    double best = std::numeric_limits<double>::infinity();
    auto eval = [&](const Vector& w) { best = std::min(best, w.dot(h * w) + 2.0 * c.dot(w)); };
    Vector w(k);
    if (k == 1) {
        w << 1.0;
        eval(w);
    } else if (k == 2) {
        for (long i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(steps);
            w << t, 1.0 - t;
            eval(w);
        }
    } else {
        for (long i = 0; i <= steps; ++i)
            for (long j = 0; j <= steps - i; ++j) {
                const double a = static_cast<double>(i) / static_cast<double>(steps);
                const double b = static_cast<double>(j) / static_cast<double>(steps);
                w << a, b, std::max(0.0, 1.0 - a - b);
                eval(w);
            }
    }
    return best;
}

} // namespace magging::testing
