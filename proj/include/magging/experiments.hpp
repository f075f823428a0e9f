#pragma once

// End-to-end runs shared by the CLI `figure` command and the acceptance
// suite: the periodic-signal comparison and the support-growth geometry.

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "aggregators.hpp"
#include "estimators.hpp"
#include "linalg.hpp"
#include "maximin.hpp"
#include "rng.hpp"
#include "sim.hpp"

namespace magging {

/// Mean squared difference between X_rec * theta (+ intercept) and a signal,
/// where X_rec is one recording's design.
inline double signal_mse(const Eigen::Ref<const Matrix>& recording_design, const Eigen::Ref<const Vector>& theta,
                         const Eigen::Ref<const Vector>& signal, double intercept = 0.0)
{
    detail::require(recording_design.rows() == signal.size(), "signal_mse: design rows differ from signal length");
    return (fitted_values(recording_design, theta, intercept) - signal).squaredNorm() / static_cast<double>(signal.size());
}

struct PeriodicRun {
    SimOutput sim;
    Matrix dictionary; // one recording's design, P x 2 dict_size
    Ensemble ensemble;
    AggregationResult mean;
    AggregationResult magging;
    AggregationResult pooled;
    double mse_mean = 0.0;
    double mse_magging = 0.0;
    double mse_pooled = 0.0;

    bool magging_best() const { return mse_magging < mse_mean && mse_magging < mse_pooled; }
};

inline PeriodicRun run_periodic(const PeriodicSimConfig& cfg, const EstimatorSpec& spec = EstimatorSpec::ols(),
                                const QpOptions& opts = {})
{
    PeriodicRun run;
    run.sim = simulate_periodic(cfg);
    run.dictionary = periodic_dictionary(cfg.n_per_group, cfg.dict_size);
    run.ensemble = fit_ensemble(run.sim.x, run.sim.y, run.sim.grouping, spec);
    run.mean = mean_aggregate(run.ensemble);
    run.magging = magging_aggregate(run.ensemble, opts);
    run.pooled = pooled_result(fit_pooled(run.sim.x, run.sim.y, spec));
    const Vector& common = *run.sim.common_signal;
    run.mse_mean = signal_mse(run.dictionary, run.mean.theta, common, run.mean.intercept);
    run.mse_magging = signal_mse(run.dictionary, run.magging.theta, common, run.magging.intercept);
    run.mse_pooled = signal_mse(run.dictionary, run.pooled.theta, common, run.pooled.intercept);
    return run;
}

/// Two-dimensional support-growth example. `kept` lies in the half-space
/// {b : b' S m >= m' S m} of the current maximin point m, far from the hull,
/// and leaves m unchanged; `moved` lies outside it and pulls m towards zero.
struct RobustnessRun {
    SupportSpec support;
    Vector kept;
    Vector moved;
    MaximinPoint before;
    MaximinPoint after_kept;
    MaximinPoint after_moved;
};

inline RobustnessRun run_robustness(std::uint64_t seed, const QpOptions& opts = {})
{
    Rng rng = Rng::stream(seed, 0);
    RobustnessRun run;
    // Three points in a cone around a random direction, so zero is outside
    // their hull.
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int k = 0; k < 3; ++k) {
        const double a = angle + rng.uniform(-0.6, 0.6);
        const double r = rng.uniform(1.0, 2.0);
        run.support.points.push_back((Vector(2) << r * std::cos(a), r * std::sin(a)).finished());
    }
    Matrix rot(2, 2);
    const double phi = rng.uniform(0.0, std::numbers::pi);
    rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    const Vector eig = (Vector(2) << rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)).finished();
    run.support.sigma = rot * eig.asDiagonal() * rot.transpose();
    run.support.sigma = 0.5 * (run.support.sigma + run.support.sigma.transpose());

    run.before = maximin_point(run.support, opts);
    const Vector& m = run.before.point;
    const Vector sm = run.support.sigma * m;
    // Direction S-orthogonal to m.
    const Vector tangent = (Vector(2) << -sm(1), sm(0)).finished().normalized();
    run.kept = 1.5 * m + 6.0 * tangent;
    run.moved = 0.3 * m + 1.5 * tangent;

    auto grown = [&](const Vector& extra) {
        SupportSpec s = run.support;
        s.points.push_back(extra);
        return maximin_point(s, opts);
    };
    run.after_kept = grown(run.kept);
    run.after_moved = grown(run.moved);
    return run;
}

} // namespace magging
