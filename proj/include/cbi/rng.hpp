#pragma once

#include <cmath>
#include <cstdint>

namespace cbi {

/// Counter-based splittable generator: the stream is a pure function of
/// (seed, path, step, substream), so path simulation is reproducible
/// bit-exactly regardless of execution order or thread count.
///
/// Keys are mixed into a 64-bit state with SplitMix64-style finalizers;
/// draws within one substream advance a Weyl sequence through the same
/// finalizer.
class KeyedRng {
public:
    KeyedRng(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
             std::uint64_t substream) {
        state_ = mix(mix(mix(mix(0x9e3779b97f4a7c15ull ^ seed) + path) + step) +
                     substream);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    /// Uniform in (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (one value per call; the sine partner
    /// is discarded to keep the draw count predictable).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    /// Poisson count by Knuth's product method; large means use the exact
    /// additivity split Poisson(m) = Poisson(m/2) + Poisson(m/2).
    unsigned poisson(double mean) {
        unsigned total = 0;
        while (mean > 30.0) {
            mean *= 0.5;
            total += poisson(mean);
        }
        return total + knuth(mean);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    unsigned knuth(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        double prod = 1.0;
        unsigned k = 0;
        do {
            prod *= uniform();
            if (prod <= limit) break;
            ++k;
        } while (true);
        return k;
    }

    std::uint64_t state_;
};

}  // namespace cbi
