#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qsig {

using Engine = std::mt19937_64;

/// splitmix64 finaliser; used to derive independent stream seeds from a
/// master seed and a list of stream keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t s = mix64(master);
    for (auto k : keys) s = mix64(s ^ mix64(k));
    return s;
}

/// Uniform double in [0, 1) from the top 53 bits. Unlike
/// std::uniform_real_distribution this is identical across standard libraries.
inline double uniform01(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Modulo bias is negligible for the small n used here.
inline std::uint64_t uniform_index(Engine& rng, std::uint64_t n) {
    return rng() % n;
}

// Stream tags for derive_seed.
enum class Stream : std::uint64_t {
    Injection = 1,
    Driver = 2,
    Anneal = 3,
};

}  // namespace qsig
