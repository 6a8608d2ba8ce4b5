#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace swarmcc {

// Derives well-separated 64-bit seeds from a master seed. Used to give every
// consumer (fading, mobility, per-agent exploration, ...) its own stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic random stream. All draws are produced from raw mt19937_64
// output with fixed arithmetic, so results are identical across standard
// libraries and platforms (std::*_distribution is implementation-defined).
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Lemire reduction, bias < 2^-64.
    int uniform_int(int n) {
        return static_cast<int>(
            (static_cast<unsigned __int128>(gen_()) * static_cast<unsigned __int128>(n)) >> 64);
    }

    // Standard normal via Box-Muller.
    double gaussian() {
        const double u = 1.0 - uniform();  // (0, 1], keeps log finite
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
    }

    // Circularly-symmetric complex normal CN(0,1): E|z|^2 = 1.
    std::complex<double> complex_gaussian() {
        const double u = 1.0 - uniform();
        const double v = uniform();
        const double r = std::sqrt(-std::log(u));  // |z| for unit total variance
        return {r * std::cos(2.0 * M_PI * v), r * std::sin(2.0 * M_PI * v)};
    }

    // Child stream whose seed is derived from this stream's next output.
    RandomStream derive() {
        std::uint64_t s = gen_();
        return RandomStream(splitmix64(s));
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace swarmcc
