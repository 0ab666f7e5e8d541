#pragma once

#include <bit>
#include <cstdint>

namespace retrieval {

// 64-bit finalizer (splitmix64 style). Full avalanche, bijective.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr uint64_t mix2(uint64_t a, uint64_t b) {
    return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL));
}

constexpr uint64_t mix4(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    return mix2(mix2(a, b), mix2(c, d));
}

// Unbiased-enough range map: top bits of the 128-bit product.
constexpr uint64_t map_to_range(uint64_t hash, uint64_t range) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(hash) * range) >> 64);
}

// Number of bits needed to store values in [0, n); 0 for n <= 1.
constexpr uint32_t bits_for_range(uint64_t n) {
    return n <= 1 ? 0 : static_cast<uint32_t>(std::bit_width(n - 1));
}

// Number of bits needed to store values in [0, n] (counts, headers).
constexpr uint32_t bits_for_count(uint64_t n) {
    return static_cast<uint32_t>(std::bit_width(n));
}

}  // namespace retrieval
