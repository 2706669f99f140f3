#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cvdcm {

// splitmix64 finalizer; used to derive independent stream seeds from a
// single root seed so every command's randomness fans out of one --seed.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                                 std::uint64_t counter = 0) {
    return mix64(mix64(root ^ mix64(stream)) + counter);
}

// Deterministic RNG. mt19937_64 output is pinned by the standard; the
// samplers below are hand-rolled because std::*_distribution is
// implementation-defined and would break cross-platform reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform on [0,1) with 53 random bits
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform on {0, ..., n-1}, unbiased via rejection
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, one value per call (the pair's partner is discarded to
    // keep the stream position independent of call parity)
    double normal(double mean = 0.0, double sd = 1.0) {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(2.0 * M_PI * u2);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    Rng fork(std::uint64_t stream, std::uint64_t counter = 0) {
        return Rng(derive_seed(engine_(), stream, counter));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace cvdcm
