#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lit {

// splitmix64 step; used to derive independent stream seeds from a master
// seed plus structural coordinates (trial index, node count, ...).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t s = splitmix64(base);
    for (auto p : parts) s = splitmix64(s ^ (p + 0x9e3779b97f4a7c15ULL));
    return s;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

}  // namespace lit
