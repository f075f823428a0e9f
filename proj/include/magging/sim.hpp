#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "grouping.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace magging {

enum class Scenario { Clusterwise, SmoothDrift, OutlierContamination, Periodic };

inline std::string to_string(Scenario s)
{
    switch (s) {
    case Scenario::Clusterwise: return "clusterwise";
    case Scenario::SmoothDrift: return "smooth_drift";
    case Scenario::OutlierContamination: return "outlier_contamination";
    case Scenario::Periodic: return "periodic";
    }
    return "unknown";
}

inline Scenario scenario_from_string(const std::string& s)
{
    if (s == "clusterwise") return Scenario::Clusterwise;
    if (s == "smooth_drift") return Scenario::SmoothDrift;
    if (s == "outlier_contamination") return Scenario::OutlierContamination;
    if (s == "periodic") return Scenario::Periodic;
    throw InputError("unknown scenario '" + s + "'");
}

/// Data from Y_i = X_i' B_i + eps_i under one of the three mixture
/// settings. X rows are i.i.d. N(0, I) unless `orthogonal_design` is set, in
/// which case every group's rows cycle through sqrt(p) e_1, ..., sqrt(p) e_p
/// so that each group's Gram matrix is exactly the identity.
struct MixtureSimConfig {
    Index n = 3000;
    Index p = 5;
    Index num_groups = 3;
    Scenario scenario = Scenario::Clusterwise;
    double noise_sd = 1.0;
    double coefficient_scale = 1.0;
    double contamination_fraction = 0.0;
    double outlier_scale = 10.0;
    /// Subsample size for OutlierContamination groups; 0 means floor(n/G).
    Index group_size = 0;
    bool orthogonal_design = false;
    std::uint64_t seed = 0;

    void validate() const
    {
        detail::require(n >= 1 && p >= 1 && num_groups >= 1, "simulate: n, p and G must be >= 1");
        detail::require(num_groups <= n, "simulate: G exceeds n");
        detail::require(std::isfinite(noise_sd) && noise_sd >= 0.0, "simulate: noise_sd must be >= 0");
        detail::require(std::isfinite(coefficient_scale) && coefficient_scale >= 0.0, "simulate: coefficient_scale must be >= 0");
        detail::require(contamination_fraction >= 0.0 && contamination_fraction < 0.5,
                        "simulate: contamination_fraction must lie in [0, 0.5) so that a majority remains");
        detail::require(std::isfinite(outlier_scale) && outlier_scale >= 0.0, "simulate: outlier_scale must be >= 0");
        detail::require(group_size >= 0 && group_size <= n, "simulate: group_size must lie in [0, n]");
        if (scenario == Scenario::Periodic) throw InputError("simulate: use PeriodicSimConfig for the periodic scenario");
        if (orthogonal_design) {
            detail::require(scenario == Scenario::Clusterwise, "simulate: orthogonal design is only defined for clusterwise data");
            detail::require(n % num_groups == 0 && (n / num_groups) % p == 0,
                            "simulate: orthogonal design needs equal groups whose size is a multiple of p");
        }
    }
};

/// Recordings of length P sharing one common periodic effect, each with its
/// own random periodic components (random phase) and noise.
struct PeriodicSimConfig {
    Index n_per_group = 1000;
    Index num_groups = 50;
    Index dict_size = 100;
    Index common_components = 2;
    Index per_group_components = 7;
    double noise_sd = 1.0;
    double common_amplitude = 1.0;
    double group_amplitude = 1.0;
    /// Draw the non-common frequencies once and share them across groups
    /// (each group still gets its own phases); otherwise every group draws
    /// its own frequency set.
    bool shared_frequencies = true;
    std::uint64_t seed = 0;

    void validate() const
    {
        detail::require(num_groups >= 1 && dict_size >= 1, "simulate: G and dict_size must be >= 1");
        detail::require(common_components >= 0 && per_group_components >= 0, "simulate: component counts must be >= 0");
        detail::require(common_components + per_group_components <= dict_size,
                        "simulate: common + per-group components exceed the dictionary size");
        detail::require(n_per_group > 2 * dict_size,
                        "simulate: recording length must exceed twice the dictionary size");
        detail::require(std::isfinite(noise_sd) && noise_sd >= 0.0, "simulate: noise_sd must be >= 0");
    }
};

struct SimOutput {
    Matrix x;
    Vector y;
    Grouping grouping;
    /// Group label per sample when the groups are known, else empty.
    std::vector<std::int64_t> labels;
    /// Per-sample coefficients (n x p); empty when `group_b` is authoritative.
    Matrix true_b;
    /// Per-group coefficient b_g (one column per group) when B_i is constant
    /// within groups.
    Matrix group_b;
    Matrix sigma;
    std::optional<Vector> common_signal;
    std::optional<Vector> majority_b;
    Scenario scenario = Scenario::Clusterwise;
    std::uint64_t seed = 0;
    Index recording_length = 0;

    Index n() const { return x.rows(); }
    Index p() const { return x.cols(); }

    /// Coefficient of sample i.
    Vector coefficient(Index i) const
    {
        if (true_b.rows() > 0) return true_b.row(i).transpose();
        return group_b.col(static_cast<Index>(labels.at(static_cast<std::size_t>(i))));
    }

    /// b_g* = average of B_i over each group of `g`.
    std::vector<Vector> group_optimal(const Grouping& g) const
    {
        std::vector<Vector> out;
        for (const auto& idx : g.groups) out.push_back(average_of(idx, [&](Index i) { return coefficient(i); }));
        return out;
    }

    /// Mean of coef(i) over idx; exact when all the vectors coincide.
    template <class Coef>
    static Vector average_of(const std::vector<Index>& idx, Coef&& coef)
    {
        detail::require(!idx.empty(), "group_optimal: empty group");
        const Vector first = coef(idx.front());
        Vector acc = Vector::Zero(first.size());
        bool constant = true;
        for (Index i : idx) {
            const Vector b = coef(i);
            constant = constant && b == first;
            acc += b;
        }
        return constant ? first : Vector(acc / static_cast<double>(idx.size()));
    }
};

namespace detail {

// Stream indices separating the roles of random draws for a given seed.
inline constexpr std::uint64_t kCoefStream = 1ULL << 40;
inline constexpr std::uint64_t kContamStream = 2ULL << 40;
inline constexpr std::uint64_t kSubsampleStream = 3ULL << 40;
inline constexpr std::uint64_t kCommonStream = 4ULL << 40;

inline Vector normal_vector(Index p, double sd, Rng& rng)
{
    Vector v(p);
    for (Index j = 0; j < p; ++j) v(j) = rng.normal(0.0, sd);
    return v;
}

} // namespace detail

/// Sine/cosine dictionary on t = 0..P-1: column 2(j-1) is sin(2 pi j t / P),
/// column 2(j-1)+1 is cos(2 pi j t / P), j = 1..dict_size.
inline Matrix periodic_dictionary(Index recording_length, Index dict_size)
{
    Matrix d(recording_length, 2 * dict_size);
    for (Index t = 0; t < recording_length; ++t) {
        for (Index j = 1; j <= dict_size; ++j) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(j * t % recording_length)
                             / static_cast<double>(recording_length);
            d(t, 2 * (j - 1)) = std::sin(a);
            d(t, 2 * (j - 1) + 1) = std::cos(a);
        }
    }
    return d;
}

inline SimOutput simulate_mixture(const MixtureSimConfig& cfg)
{
    cfg.validate();
    const Index n = cfg.n;
    const Index p = cfg.p;
    SimOutput out;
    out.scenario = cfg.scenario;
    out.seed = cfg.seed;
    out.sigma = Matrix::Identity(p, p);
    out.x.resize(n, p);
    out.y.resize(n);

    // Known clusters / time blocks: consecutive, last one takes the remainder.
    const Grouping blocks = consecutive_blocks(n, cfg.num_groups);

    // Design rows and noise are drawn per block from (seed, block) streams.
    Vector noise(n);
    for (Index g = 0; g < blocks.size(); ++g) {
        Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(g));
        const auto& idx = blocks.groups[static_cast<std::size_t>(g)];
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const Index i = idx[k];
            if (cfg.orthogonal_design) {
                out.x.row(i).setZero();
                out.x(i, static_cast<Index>(k) % p) = std::sqrt(static_cast<double>(p));
            } else {
                for (Index j = 0; j < p; ++j) out.x(i, j) = rng.normal();
            }
            noise(i) = rng.normal(0.0, cfg.noise_sd);
        }
    }

    Rng coef_rng = Rng::stream(cfg.seed, detail::kCoefStream);
    switch (cfg.scenario) {
    case Scenario::Clusterwise: {
        out.grouping = blocks;
        out.grouping.strategy = GroupStrategy::Known;
        out.labels.resize(static_cast<std::size_t>(n));
        out.group_b.resize(p, cfg.num_groups);
        for (Index g = 0; g < cfg.num_groups; ++g) {
            out.group_b.col(g) = detail::normal_vector(p, cfg.coefficient_scale, coef_rng);
            for (Index i : blocks.groups[static_cast<std::size_t>(g)]) out.labels[static_cast<std::size_t>(i)] = g;
        }
        break;
    }
    case Scenario::SmoothDrift: {
        out.grouping = blocks;
        out.true_b.resize(n, p);
        const double step = cfg.coefficient_scale / std::sqrt(static_cast<double>(n));
        Vector b = detail::normal_vector(p, cfg.coefficient_scale, coef_rng);
        for (Index i = 0; i < n; ++i) {
            if (i > 0) b += detail::normal_vector(p, step, coef_rng);
            out.true_b.row(i) = b.transpose();
        }
        break;
    }
    case Scenario::OutlierContamination: {
        const Index m = cfg.group_size > 0 ? cfg.group_size : n / cfg.num_groups;
        out.grouping = random_subsample(n, cfg.num_groups, m, cfg.seed ^ detail::kSubsampleStream);
        const Vector b = detail::normal_vector(p, cfg.coefficient_scale, coef_rng);
        out.majority_b = b;
        out.true_b = b.transpose().replicate(n, 1);
        const auto outliers = static_cast<Index>(std::floor(cfg.contamination_fraction * static_cast<double>(n)));
        if (outliers > 0) {
            Rng rng = Rng::stream(cfg.seed, detail::kContamStream);
            const IndexSet which = detail::draw_without_replacement(n, outliers, rng);
            const Vector sb = out.sigma * b;
            for (Index i : which) {
                // Large deviations kept in the half-space {d : d' S b >= 0},
                // which leaves the maximin point of the support at b.
                Vector d = detail::normal_vector(p, cfg.outlier_scale, rng);
                if (d.dot(sb) < 0.0) d = -d;
                out.true_b.row(i) = (b + d).transpose();
            }
        }
        break;
    }
    case Scenario::Periodic: break;
    }

    for (Index i = 0; i < n; ++i) out.y(i) = out.x.row(i).dot(out.coefficient(i)) + noise(i);
    return out;
}

inline SimOutput simulate_periodic(const PeriodicSimConfig& cfg)
{
    cfg.validate();
    const Index len = cfg.n_per_group;
    const Index groups = cfg.num_groups;
    const Index p = 2 * cfg.dict_size;
    const Matrix dict = periodic_dictionary(len, cfg.dict_size);

    SimOutput out;
    out.scenario = Scenario::Periodic;
    out.seed = cfg.seed;
    out.recording_length = len;
    out.x.resize(len * groups, p);
    out.y.resize(len * groups);
    out.labels.resize(static_cast<std::size_t>(len * groups));
    out.group_b.resize(p, groups);
    // Population second moment of the dictionary rows over a full period.
    out.sigma = linalg::gram(dict, true);

    auto add_component = [](Vector& coef, Index freq, double amplitude, Rng& rng) {
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        coef(2 * freq) += amplitude * std::cos(phase);
        coef(2 * freq + 1) += amplitude * std::sin(phase);
    };

    Rng common_rng = Rng::stream(cfg.seed, detail::kCommonStream);
    const IndexSet common = detail::draw_without_replacement(cfg.dict_size, cfg.common_components, common_rng);
    Vector common_coef = Vector::Zero(p);
    for (Index f : common) add_component(common_coef, f, cfg.common_amplitude, common_rng);
    out.common_signal = dict * common_coef;

    // Frequencies outside the common set, available to the per-group parts.
    IndexSet others;
    for (Index f = 0; f < cfg.dict_size; ++f)
        if (std::find(common.begin(), common.end(), f) == common.end()) others.push_back(f);

    const IndexSet shared_pick =
        detail::draw_without_replacement(static_cast<Index>(others.size()), cfg.per_group_components, common_rng);
    for (Index g = 0; g < groups; ++g) {
        Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(g));
        Vector coef = common_coef;
        const IndexSet pick = cfg.shared_frequencies
                                  ? shared_pick
                                  : detail::draw_without_replacement(static_cast<Index>(others.size()),
                                                                     cfg.per_group_components, rng);
        for (Index k : pick) add_component(coef, others[static_cast<std::size_t>(k)], cfg.group_amplitude, rng);
        out.group_b.col(g) = coef;

        for (Index t = 0; t < len; ++t) {
            const Index i = g * len + t;
            out.x.row(i) = dict.row(t);
            out.y(i) = out.x.row(i).dot(coef) + rng.normal(0.0, cfg.noise_sd);
            out.labels[static_cast<std::size_t>(i)] = g;
        }
    }
    std::vector<std::int64_t> labels = out.labels;
    out.grouping = known_groups(labels);
    return out;
}

} // namespace magging
