#pragma once
// Seeded randomness helpers. Every sampling routine in the project goes
// through these instead of std::*_distribution, whose output is
// implementation-defined; this keeps artifacts reproducible across stdlibs.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace tagembed::rng {

using Engine = std::mt19937_64;

inline Engine make(std::uint64_t seed) { return Engine(seed); }

// splitmix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
    return mix(base ^ mix(stream));
}

inline std::uint64_t derive(std::uint64_t base, std::uint64_t stream, std::uint64_t substream) {
    return mix(derive(base, stream) ^ mix(substream + 0x51ed270b5f2c2b17ULL));
}

// Unbiased integer in [0, n) via rejection sampling.
inline std::size_t uniform_index(Engine& eng, std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Engine& eng, double p) { return uniform01(eng) < p; }

// Standard normal via Marsaglia polar method (one value per call; the spare
// is discarded so the draw count stays predictable).
inline double normal(Engine& eng) {
    while (true) {
        const double u = 2.0 * uniform01(eng) - 1.0;
        const double v = 2.0 * uniform01(eng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

template <typename T>
void shuffle(std::vector<T>& v, Engine& eng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_index(eng, i)]);
    }
}

// k distinct elements of v, uniformly without replacement, in draw order.
template <typename T>
std::vector<T> sample_without_replacement(const std::vector<T>& v, std::size_t k, Engine& eng) {
    std::vector<T> pool = v;
    const std::size_t m = std::min(k, pool.size());
    std::vector<T> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + uniform_index(eng, pool.size() - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace tagembed::rng
