#pragma once

#include <cstdint>

namespace densctl {

/// Counter-based generator: every draw is a pure function of
/// (seed, agent, step, slot). Streams are independent per agent index, so
/// trajectories are reproducible and unaffected by how many agents follow,
/// and parallel stepping cannot reorder draws.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    /// Marker for draws made before stepping starts (initial positions,
    /// per-agent parameters).
    static constexpr std::uint64_t kInitStep = ~0ull;

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform in [0, 1).
    double uniform(std::uint64_t agent, std::uint64_t step, std::uint32_t slot) const;

    /// Standard normal (Box-Muller; consumes two internal uniforms in a
    /// slot space disjoint from uniform()).
    double normal(std::uint64_t agent, std::uint64_t step, std::uint32_t slot) const;

private:
    std::uint64_t seed_;
};

}  // namespace densctl
