#include <gtest/gtest.h>

#include <magging/experiments.hpp>
#include <magging/sim.hpp>

using namespace magging;

TEST(Mixture, NoiselessClusterwiseRecoversCoefficients)
{
    MixtureSimConfig c;
    c.n = 300;
    c.p = 4;
    c.num_groups = 3;
    c.noise_sd = 0.0;
    c.seed = 1;
    const SimOutput sim = simulate_mixture(c);
    const Ensemble ens = fit_ensemble(sim.x, sim.y, sim.grouping, EstimatorSpec::ols());
    for (Index g = 0; g < 3; ++g)
        EXPECT_LE((ens.thetas[static_cast<std::size_t>(g)] - sim.group_b.col(g)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Mixture, NullModel)
{
    MixtureSimConfig c;
    c.coefficient_scale = 0.0;
    c.n = 200;
    const SimOutput sim = simulate_mixture(c);
    EXPECT_EQ(sim.group_b.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(sim.y.norm(), 0.0);
}

TEST(Mixture, Reproducible)
{
    for (Scenario s : {Scenario::Clusterwise, Scenario::SmoothDrift, Scenario::OutlierContamination}) {
        MixtureSimConfig c;
        c.n = 500;
        c.num_groups = 10;
        c.scenario = s;
        c.contamination_fraction = s == Scenario::OutlierContamination ? 0.2 : 0.0;
        c.seed = 77;
        const SimOutput a = simulate_mixture(c), b = simulate_mixture(c);
        EXPECT_EQ(a.x, b.x);
        EXPECT_EQ(a.y, b.y);
        EXPECT_EQ(a.grouping, b.grouping);
        c.seed = 78;
        EXPECT_NE(simulate_mixture(c).y, a.y);
    }
}

TEST(Mixture, ResponseReplaysFromCoefficients)
{
    // Y_i - X_i B_i is the noise; it scales exactly with noise_sd.
    for (Scenario s : {Scenario::Clusterwise, Scenario::SmoothDrift, Scenario::OutlierContamination}) {
        MixtureSimConfig c;
        c.n = 400;
        c.num_groups = 8;
        c.scenario = s;
        c.contamination_fraction = s == Scenario::OutlierContamination ? 0.25 : 0.0;
        c.seed = 3;
        const SimOutput one = simulate_mixture(c);
        c.noise_sd = 2.0;
        const SimOutput two = simulate_mixture(c);
        for (Index i = 0; i < one.n(); ++i) {
            const double e1 = one.y(i) - one.x.row(i).dot(one.coefficient(i));
            const double e2 = two.y(i) - two.x.row(i).dot(two.coefficient(i));
            ASSERT_NEAR(e2, 2.0 * e1, 1e-12 * (1.0 + std::abs(e2)));
        }
    }
}

TEST(Mixture, OutlierStructure)
{
    MixtureSimConfig c;
    c.n = 1000;
    c.num_groups = 50;
    c.scenario = Scenario::OutlierContamination;
    c.contamination_fraction = 0.2;
    c.seed = 9;
    const SimOutput sim = simulate_mixture(c);
    ASSERT_TRUE(sim.majority_b.has_value());
    int outliers = 0;
    for (Index i = 0; i < sim.n(); ++i) {
        const Vector b = sim.coefficient(i);
        if (b != *sim.majority_b) {
            ++outliers;
            // Outliers sit in the half-space that keeps the majority vector
            // as the maximin point.
            EXPECT_GE((b - *sim.majority_b).dot(sim.sigma * *sim.majority_b), 0.0);
        }
    }
    EXPECT_EQ(outliers, 200);
    EXPECT_EQ(sim.grouping.strategy, GroupStrategy::RandomSubsample);
    EXPECT_EQ(sim.grouping.size(), 50);
    EXPECT_EQ(sim.grouping.min_group_size(), 20);
}

TEST(Mixture, ConfigValidation)
{
    MixtureSimConfig c;
    c.scenario = Scenario::OutlierContamination;
    c.contamination_fraction = 0.99;
    EXPECT_THROW(simulate_mixture(c), InputError);
    MixtureSimConfig d;
    d.noise_sd = -1.0;
    EXPECT_THROW(simulate_mixture(d), InputError);
    MixtureSimConfig e;
    e.num_groups = 0;
    EXPECT_THROW(simulate_mixture(e), InputError);
}

TEST(Mixture, OrthogonalDesignHasIdentityGram)
{
    MixtureSimConfig c;
    c.n = 60;
    c.p = 5;
    c.num_groups = 3;
    c.orthogonal_design = true;
    const SimOutput sim = simulate_mixture(c);
    for (const auto& idx : sim.grouping.groups)
        EXPECT_LE(linalg::max_abs_diff(linalg::gram(linalg::select_rows(sim.x, idx), true), Matrix::Identity(5, 5)), 1e-14);
}

TEST(Periodic, PureCommonEffect)
{
    PeriodicSimConfig c;
    c.n_per_group = 250;
    c.num_groups = 4;
    c.per_group_components = 0;
    c.noise_sd = 0.0;
    const SimOutput sim = simulate_periodic(c);
    for (Index g = 0; g < 4; ++g) EXPECT_LE((sim.y.segment(g * 250, 250) - *sim.common_signal).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Periodic, DefaultsMatchSetup)
{
    const PeriodicSimConfig c;
    EXPECT_EQ(c.num_groups, 50);
    EXPECT_EQ(c.dict_size, 100);
    EXPECT_EQ(c.per_group_components, 7);
    EXPECT_EQ(c.common_components, 2);
}

TEST(Periodic, DictionaryOrthogonality)
{
    const Matrix d = periodic_dictionary(400, 100);
    const Matrix g = linalg::gram(d, true);
    EXPECT_LE(linalg::max_abs_diff(g, 0.5 * Matrix::Identity(200, 200)), 1e-8);
}

TEST(Periodic, GroupComponentsCount)
{
    PeriodicSimConfig c;
    c.n_per_group = 250;
    c.num_groups = 6;
    c.seed = 2;
    for (bool shared : {true, false}) {
        c.shared_frequencies = shared;
        const SimOutput sim = simulate_periodic(c);
        const Matrix d = periodic_dictionary(250, 100);
        const Vector common = (d.transpose() * *sim.common_signal) * (2.0 / 250.0);
        for (Index g = 0; g < 6; ++g) {
            const Vector extra = sim.group_b.col(g) - common;
            int active = 0;
            for (Index j = 0; j < 100; ++j)
                if (std::hypot(extra(2 * j), extra(2 * j + 1)) > 1e-9) ++active;
            EXPECT_EQ(active, 7);
        }
    }
}

TEST(Periodic, NoCommonEffectLeavesNothing)
{
    PeriodicSimConfig c;
    c.n_per_group = 250;
    c.common_components = 0;
    c.noise_sd = 0.2;
    c.seed = 6;
    const PeriodicRun run = run_periodic(c);
    EXPECT_LT(run.mse_magging, 0.2 * run.mse_mean);
    EXPECT_LT((run.dictionary * run.magging.theta).squaredNorm() / 250.0, 0.05);
}

TEST(Periodic, Reproducible)
{
    PeriodicSimConfig c;
    c.n_per_group = 250;
    c.num_groups = 5;
    c.seed = 12;
    const SimOutput a = simulate_periodic(c), b = simulate_periodic(c);
    EXPECT_EQ(a.y, b.y);
    EXPECT_EQ(a.group_b, b.group_b);
}

TEST(Periodic, ConfigValidation)
{
    PeriodicSimConfig c;
    c.common_components = 60;
    c.per_group_components = 50;
    EXPECT_THROW(simulate_periodic(c), InputError);
    PeriodicSimConfig d;
    d.n_per_group = 150;
    EXPECT_THROW(simulate_periodic(d), InputError);
}

TEST(Scenario, Strings)
{
    for (Scenario s : {Scenario::Clusterwise, Scenario::SmoothDrift, Scenario::OutlierContamination, Scenario::Periodic})
        EXPECT_EQ(scenario_from_string(to_string(s)), s);
    EXPECT_THROW(scenario_from_string("nope"), InputError);
}
