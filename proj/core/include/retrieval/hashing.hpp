#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "retrieval/bits.hpp"
#include "retrieval/params.hpp"

namespace retrieval {

// Seed derivation tags. One master seed fans out into independent streams.
enum class SeedStream : uint64_t {
    Bucket = 0x42554b54,      // key -> bucket index
    InitialFp = 0x46494e47,   // key -> initial fingerprint
    Reducer = 0x52454455,     // per-(round, bucket, trial) reduction functions
    ValueStore = 0x56414c53,  // per-round probe polynomials
};

inline uint64_t derive_seed(uint64_t master_seed, SeedStream stream) {
    return mix2(master_seed, static_cast<uint64_t>(stream));
}

// Bucket index of a key: strong mix of (key, seed) mapped onto [bucket_count].
// The key must be < 2^u_bits.
uint64_t bucket_of(uint64_t key, const RetrievalConfig& cfg);

// Initial local fingerprint in [B * 2^t0]. Uniform per key, independent of
// the bucket map by seed separation.
uint64_t initial_fingerprint(uint64_t key, const RetrievalConfig& cfg, uint32_t t0);

// 5-wise independent hash: degree-4 polynomial over F_p, p = 2^61 - 1,
// folded onto [range]. Used by value stores for linear probing; five-wise
// independence keeps expected probe lengths O((M/(M-i))^2.5) per insertion.
class FiveWisePoly {
  public:
    FiveWisePoly() = default;
    FiveWisePoly(uint64_t seed, uint64_t range);

    uint64_t operator()(uint64_t key) const;
    uint64_t range() const { return range_; }
    const std::array<uint64_t, 5>& coefficients() const { return coeff_; }

    // Reconstruct from serialized coefficients.
    static FiveWisePoly from_coefficients(const std::array<uint64_t, 5>& coeff, uint64_t range);

    static constexpr uint64_t kPrime = (uint64_t(1) << 61) - 1;

  private:
    std::array<uint64_t, 5> coeff_{};
    uint64_t range_ = 1;
};

// Description lengths in bits, reported by the space meter. Honest widths of
// what the snapshot actually stores.
constexpr uint64_t kSeedDescriptionBits = 64;
constexpr uint64_t kPolyDescriptionBits = 5 * 64;

}  // namespace retrieval
