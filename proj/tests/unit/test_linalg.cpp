#include <gtest/gtest.h>

#include <magging/linalg.hpp>

#include "support.hpp"

using namespace magging;
using magging::testing::random_matrix;
using magging::testing::random_psd;
using magging::testing::random_simplex_point;
using magging::testing::random_vector;

TEST(Gram, ScaledIdentity)
{
    const Matrix g = linalg::gram(Matrix::Identity(2, 2), true);
    EXPECT_TRUE(g.isApprox(0.5 * Matrix::Identity(2, 2)));
}

TEST(Gram, ThreeRowExample)
{
    Matrix x(3, 2);
    x << 1, 0, 0, 1, 1, 1;
    Matrix expected(2, 2);
    expected << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;
    EXPECT_LT((linalg::gram(x, true) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gram, SingleRowOuterProduct)
{
    Matrix x(1, 2);
    x << 3.0, -2.0;
    Matrix expected(2, 2);
    expected << 9, -6, -6, 4;
    EXPECT_EQ(linalg::gram(x, false), expected);
}

TEST(Gram, ExactlySymmetric)
{
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix x = random_matrix(rng, 37, 9);
        const Matrix g = linalg::gram(x, rep % 2 == 0);
        for (Index i = 0; i < g.rows(); ++i)
            for (Index j = 0; j < g.cols(); ++j) ASSERT_EQ(g(i, j), g(j, i));
    }
}

TEST(Gram, RejectsEmpty) { EXPECT_THROW(linalg::gram(Matrix(0, 3), true), InputError); }

TEST(SigmaNorm, Examples)
{
    EXPECT_EQ(linalg::sigma_norm_sq(Vector::Zero(3), Matrix::Identity(3, 3)), 0.0);
    EXPECT_DOUBLE_EQ(linalg::sigma_norm_sq((Vector(2) << 1, 0).finished(), Matrix::Identity(2, 2)), 1.0);
    Matrix s(2, 2);
    s << 2, 1, 1, 2;
    EXPECT_DOUBLE_EQ(linalg::sigma_norm_sq((Vector(2) << 1, 1).finished(), s), 6.0);
}

TEST(SigmaNorm, DimensionMismatch)
{
    EXPECT_THROW(linalg::sigma_norm_sq(Vector::Ones(2), Matrix::Identity(3, 3)), InputError);
}

TEST(SigmaNorm, NonNegativeOnPsdFuzz)
{
    Rng rng(12);
    for (int rep = 0; rep < 1000; ++rep) {
        const Index p = 1 + static_cast<Index>(rng.below(6));
        const Index rank = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(p)));
        const Matrix s = random_psd(rng, p, rank);
        // Also probe the null space of low-rank S, where round-off can go negative.
        Vector v = random_vector(rng, p);
        if (rank < p && rep % 2 == 0) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(s);
            v = es.eigenvectors().col(0);
        }
        ASSERT_GE(linalg::sigma_norm_sq(v, s), 0.0);
    }
}

TEST(ProjectSimplex, Examples)
{
    EXPECT_EQ(linalg::project_simplex((Vector(2) << 1, 0).finished()), (Vector(2) << 1, 0).finished());
    const Vector w = linalg::project_simplex((Vector(2) << 0.6, 0.8).finished());
    EXPECT_NEAR(w(0), 0.4, 1e-15);
    EXPECT_NEAR(w(1), 0.6, 1e-15);
    for (double c : {-3.0, 0.0, 0.25, 7.5}) {
        const Vector u = linalg::project_simplex(Vector::Constant(3, c));
        for (Index i = 0; i < 3; ++i) EXPECT_NEAR(u(i), 1.0 / 3.0, 1e-15);
    }
}

TEST(ProjectSimplex, Errors)
{
    EXPECT_THROW(linalg::project_simplex(Vector(0)), InputError);
    EXPECT_THROW(linalg::project_simplex((Vector(2) << 1.0, std::nan("")).finished()), InputError);
}

TEST(ProjectSimplex, FeasibleInputIsFixed)
{
    Rng rng(13);
    for (int rep = 0; rep < 100; ++rep) {
        const Vector w = random_simplex_point(rng, 1 + static_cast<Index>(rng.below(8)));
        EXPECT_LT((linalg::project_simplex(w) - w).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(ProjectSimplex, OptimalAgainstRandomFeasiblePoints)
{
    Rng rng(14);
    for (int rep = 0; rep < 10; ++rep) {
        const Index k = 2 + static_cast<Index>(rng.below(6));
        const Vector v = 2.0 * random_vector(rng, k);
        const Vector w = linalg::project_simplex(v);
        EXPECT_NEAR(w.sum(), 1.0, 1e-12);
        EXPECT_GE(w.minCoeff(), 0.0);
        const double d = (w - v).norm();
        for (int t = 0; t < 10000; ++t) ASSERT_LE(d, (random_simplex_point(rng, k) - v).norm() + 1e-12);
    }
}

TEST(Psd, Tolerances)
{
    EXPECT_TRUE(linalg::is_psd(Matrix::Identity(3, 3)));
    Matrix s(2, 2);
    s << 1, 2, 2, 1; // eigenvalues 3, -1
    EXPECT_FALSE(linalg::is_psd(s));
    Matrix asym(2, 2);
    asym << 1, 0.5, 0.4, 1;
    EXPECT_FALSE(linalg::is_symmetric(asym));
}

TEST(SelectRows, PicksInOrder)
{
    Matrix x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    const Matrix s = linalg::select_rows(x, std::vector<Index>{2, 0});
    EXPECT_EQ(s.row(0), x.row(2));
    EXPECT_EQ(s.row(1), x.row(0));
}

TEST(SelectEntries, PicksInOrder)
{
    const Vector y = (Vector(4) << 10, 20, 30, 40).finished();
    const Vector s = linalg::select_entries(y, std::vector<Index>{3, 1, 1});
    EXPECT_EQ(s, (Vector(3) << 40, 20, 20).finished());
}
