#pragma once

// Deterministic, platform-independent random numbers for initial data.
// xorshift64* over 64-bit state, seeded through one splitmix64 scramble so
// every seed (including 0) is valid. Unit doubles take the top 53 bits of
// the output, so streams are bit-identical across platforms and compilers.

#include <cstdint>

namespace nch {

class Xorshift64Star {
public:
    explicit Xorshift64Star(std::uint64_t seed) {
        // splitmix64 scramble of the seed
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        z ^= z >> 31;
        state_ = z ? z : 0x9E3779B97F4A7C15ULL;
    }

    std::uint64_t next_u64() {
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545F4914F6CDD1DULL;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [-amplitude, amplitude).
    double next_symmetric(double amplitude) {
        return amplitude * (2.0 * next_unit() - 1.0);
    }

private:
    std::uint64_t state_;
};

} // namespace nch
