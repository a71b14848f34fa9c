#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace vvb {

/// Counter-based deterministic RNG. Streams are derived by hashing
/// (seed, sample_index, stage) with the splitmix64 finalizer, so every
/// image's draws are independent of generation order and thread schedule.
/// All distributions are implemented in-library (no std::*_distribution)
/// to keep byte-level reproducibility across standard libraries.
class Rng {
  public:
    enum class Stage : std::uint64_t {
        state_draw = 1,  // (theta, phi) sampling during dataset generation
        field_noise = 2, // perturb_field draws
        stokes_noise = 3, // perturb_stokes draws
        model_init = 4,  // weight initialization
        shuffle = 5,     // epoch shuffles / sample picks
    };

    Rng(std::uint64_t seed, std::uint64_t sample_index, Stage stage)
        : state_(derive(seed, sample_index, static_cast<std::uint64_t>(stage))) {}

    explicit Rng(std::uint64_t seed) : state_(mix(seed)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return finalize(state_);
    }

    /// Uniform double in [0, 1).
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe under log().
    double u01_open_low() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Standard normal via Box-Muller (always consumes exactly two uniforms).
    double normal() {
        const double u1 = u01_open_low();
        const double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double sigma) { return sigma == 0.0 ? 0.0 : sigma * normal(); }

    /// Uniform integer in [0, n); n must be > 0. Rejection-free modulo with
    /// 64-bit state is biased by < 2^-53 for the n used here.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    template <typename Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix(std::uint64_t x) { return finalize(x + 0x9e3779b97f4a7c15ull); }

    static std::uint64_t derive(std::uint64_t seed, std::uint64_t sample, std::uint64_t stage) {
        std::uint64_t h = mix(seed);
        h = mix(h ^ mix(sample));
        h = mix(h ^ mix(stage));
        return h;
    }

    std::uint64_t state_;
};

} // namespace vvb
