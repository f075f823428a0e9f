#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "linalg.hpp"

#include "error.hpp"
#include "rng.hpp"

namespace magging {

using IndexSet = std::vector<Index>;

enum class GroupStrategy { Known, ConsecutiveBlocks, RandomSubsample };

inline std::string to_string(GroupStrategy s)
{
    switch (s) {
    case GroupStrategy::Known: return "known";
    case GroupStrategy::ConsecutiveBlocks: return "consecutive_blocks";
    case GroupStrategy::RandomSubsample: return "random_subsample";
    }
    return "unknown";
}

inline GroupStrategy group_strategy_from_string(const std::string& s)
{
    if (s == "known") return GroupStrategy::Known;
    if (s == "consecutive_blocks") return GroupStrategy::ConsecutiveBlocks;
    if (s == "random_subsample") return GroupStrategy::RandomSubsample;
    throw InputError("unknown group strategy '" + s + "'");
}

/// G index sets over samples 0..n-1. Groups may overlap (random subsampling)
/// and need not cover every sample.
struct Grouping {
    std::vector<IndexSet> groups;
    GroupStrategy strategy = GroupStrategy::Known;
    Index n = 0;
    std::optional<std::uint64_t> seed;

    Index size() const { return static_cast<Index>(groups.size()); }

    Index min_group_size() const
    {
        Index m = n;
        for (const auto& g : groups) m = std::min<Index>(m, static_cast<Index>(g.size()));
        return m;
    }

    /// Throws InputError if any type invariant is broken.
    void validate() const
    {
        detail::require(n >= 1, "grouping: n must be >= 1");
        detail::require(!groups.empty(), "grouping: at least one group required");
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& idx = groups[g];
            detail::require(!idx.empty(), "grouping: group " + std::to_string(g) + " is empty");
            std::unordered_set<Index> seen;
            for (Index i : idx) {
                detail::require(i >= 0 && i < n, "grouping: index out of range in group " + std::to_string(g));
                if (strategy == GroupStrategy::RandomSubsample)
                    detail::require(seen.insert(i).second,
                                    "grouping: duplicate index in group " + std::to_string(g));
            }
        }
        if (strategy == GroupStrategy::ConsecutiveBlocks) {
            Index next = 0;
            for (const auto& idx : groups)
                for (Index i : idx) detail::require(i == next++, "grouping: blocks are not consecutive");
            detail::require(next == n, "grouping: blocks do not cover all samples");
        }
    }

    friend bool operator==(const Grouping&, const Grouping&) = default;
};

/// One group per distinct label, in ascending label order.
inline Grouping known_groups(const std::vector<std::int64_t>& labels)
{
    detail::require(!labels.empty(), "known_groups: empty label vector");
    std::map<std::int64_t, IndexSet> by_label;
    for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(static_cast<Index>(i));

    Grouping out;
    out.strategy = GroupStrategy::Known;
    out.n = static_cast<Index>(labels.size());
    for (auto& [label, idx] : by_label) out.groups.push_back(std::move(idx));
    return out;
}

/// G contiguous blocks of size floor(n/G); the last block takes the remainder.
inline Grouping consecutive_blocks(Index n, Index num_groups)
{
    detail::require(num_groups >= 1, "consecutive_blocks: G must be >= 1");
    detail::require(num_groups <= n, "consecutive_blocks: G (" + std::to_string(num_groups)
                                          + ") exceeds n (" + std::to_string(n) + ")");
    const Index m = n / num_groups;
    Grouping out;
    out.strategy = GroupStrategy::ConsecutiveBlocks;
    out.n = n;
    out.groups.resize(static_cast<std::size_t>(num_groups));
    for (Index g = 0; g < num_groups; ++g) {
        const Index begin = g * m;
        const Index end = (g + 1 == num_groups) ? n : begin + m;
        auto& idx = out.groups[static_cast<std::size_t>(g)];
        idx.reserve(static_cast<std::size_t>(end - begin));
        for (Index i = begin; i < end; ++i) idx.push_back(i);
    }
    return out;
}

namespace detail {

// m distinct draws from {0..n-1} (Floyd's algorithm), sorted ascending.
inline IndexSet draw_without_replacement(Index n, Index m, Rng& rng)
{
    std::unordered_set<Index> chosen;
    chosen.reserve(static_cast<std::size_t>(m) * 2);
    for (Index j = n - m; j < n; ++j) {
        const auto t = static_cast<Index>(rng.below(static_cast<std::uint64_t>(j + 1)));
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    IndexSet out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace detail

/// G groups of m distinct indices each; groups are drawn independently from
/// per-group streams of `seed`, so they may overlap.
inline Grouping random_subsample(Index n, Index num_groups, Index m, std::uint64_t seed)
{
    detail::require(num_groups >= 1, "random_subsample: G must be >= 1");
    detail::require(m >= 1, "random_subsample: m must be >= 1");
    detail::require(m <= n, "random_subsample: m (" + std::to_string(m) + ") exceeds n (" + std::to_string(n) + ")");
    Grouping out;
    out.strategy = GroupStrategy::RandomSubsample;
    out.n = n;
    out.seed = seed;
    out.groups.reserve(static_cast<std::size_t>(num_groups));
    for (Index g = 0; g < num_groups; ++g) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(g));
        out.groups.push_back(detail::draw_without_replacement(n, m, rng));
    }
    return out;
}

} // namespace magging
