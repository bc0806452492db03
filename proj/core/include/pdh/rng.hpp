// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cmath>
#include <cstdint>

namespace pdh {

/// SplitMix64 (Steele, Lea & Flood, OOPSLA 2014). The state is a plain
/// 64-bit counter advanced by the golden-ratio increment 0x9e3779b97f4a7c15;
/// each output applies the MurmurHash3-style finalizer
/// (shift-xor 30, * 0xbf58476d1ce4e5b9, shift-xor 27, * 0x94d049bb133111eb,
/// shift-xor 31) to the counter. Identical seeds therefore produce identical
/// integer streams on every conforming platform, and independent substreams
/// are obtained by seeding a child with the next output (split()).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Fixed-point multiply keeps the number
    /// of consumed draws constant, so streams stay aligned across platforms.
    uint64_t next_below(uint64_t bound) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    /// Fair coin from the top bit of one draw.
    bool next_coin() { return (next_u64() >> 63) != 0; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal deviate via the Marsaglia polar method. Consumes a
    /// variable number of draws but is fully determined by the seed.
    double normal() {
        for (;;) {
            const double u = 2.0 * next_double() - 1.0;
            const double v = 2.0 * next_double() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

    /// Child generator with an independent substream.
    Rng split() { return Rng(next_u64()); }

private:
    uint64_t state_;
};

}  // namespace pdh
