#pragma once

#include <cstdint>

namespace ron {

/// Deterministic splittable PRNG built on the splitmix64 mixer. All random
/// draws in the library flow through this class so that a run is reproducible
/// bit-for-bit from a single 64-bit seed on any platform. Independent streams
/// are derived with child(tag); the derivation rule is fixed (see
/// kRngDescription in version.hpp) and recorded in experiment metadata.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix_state(state_);
    }

    // Uniform on [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the paired value is cached.
    double next_gaussian();

    // Independent stream keyed by (current state, tag); does not advance this
    // generator, so child(t) is stable until the parent is advanced.
    SplitMix64 child(std::uint64_t tag) const {
        return SplitMix64(mix_state(state_ ^ mix_state(tag ^ 0x9e3779b97f4a7c15ull)));
    }

    std::uint64_t state() const { return state_; }

  private:
    static std::uint64_t mix_state(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

}  // namespace ron
