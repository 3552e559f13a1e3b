#pragma once

#include <cstdint>

namespace dtrot {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, index), so results do not depend on evaluation order
/// or on how work is split across threads.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    constexpr std::uint64_t seed() const noexcept { return seed_; }

    /// Independent child generator; streams with different ids do not overlap.
    constexpr CounterRng split(std::uint64_t stream) const noexcept {
        return CounterRng(mix(seed_ ^ mix(stream + 0x632be59bd9b4e019ULL)));
    }

    constexpr std::uint64_t bits(std::uint64_t index) const noexcept {
        return mix(seed_ + 0x9e3779b97f4a7c15ULL * (index + 1));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t index) const noexcept {
        return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
    }

private:
    // splitmix64 finalizer
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace dtrot
