#pragma once

#include <cstdint>
#include <cstring>
#include <random>

namespace mmsmote {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed) noexcept { return mix64(seed); }

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t next, Rest... rest) noexcept {
    return derive_seed(mix64(seed) ^ next, static_cast<std::uint64_t>(rest)...);
}

inline std::uint64_t bits_of(double value) noexcept {
    std::uint64_t out = 0;
    std::memcpy(&out, &value, sizeof(out));
    return out;
}

/// Uniform draw from the open interval (0, 1); exact zero is rejected.
inline double open_unit(Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = 0.0;
    do {
        u = dist(rng);
    } while (u <= 0.0 || u >= 1.0);
    return u;
}

}  // namespace mmsmote
