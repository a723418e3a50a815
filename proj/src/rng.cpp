#include "densctl/rng.hpp"

#include <cmath>
#include <numbers>

namespace densctl {

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_key(std::uint64_t seed, std::uint64_t agent, std::uint64_t step,
                              std::uint64_t slot) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (agent * 0xd6e8feb86659fd93ull));
    h = mix64(h ^ (step * 0xa0761d6478bd642full));
    h = mix64(h ^ (slot * 0xe7037ed1a0b428dbull));
    return h;
}

}  // namespace

double CounterRng::uniform(std::uint64_t agent, std::uint64_t step, std::uint32_t slot) const {
    return static_cast<double>(hash_key(seed_, agent, step, slot) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t agent, std::uint64_t step, std::uint32_t slot) const {
    // slots above 2^31 are reserved for these paired draws
    const std::uint64_t base = 0x80000000ull + 2ull * slot;
    const std::uint64_t b1 = hash_key(seed_, agent, step, base);
    const std::uint64_t b2 = hash_key(seed_, agent, step, base + 1);
    // keep u1 strictly positive for the log
    const double u1 = (static_cast<double>(b1 >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(b2 >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace densctl
