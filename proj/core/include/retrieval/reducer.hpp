#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "retrieval/bitstream.hpp"
#include "retrieval/bits.hpp"

namespace retrieval {

// A reduction chosen for one bucket at one round transition. Maps local
// fingerprints from [B * 2^from_bits] into [B * 2^to_bits]. Only seed_index
// is stored on disk (gamma coded); trial_seed is recomputed from it.
//
// from_bits == to_bits marks an identity entry: no remapping, no stored bits.
struct ReducerEntry {
    uint32_t round = 0;        // round being entered
    uint64_t bucket = 0;
    uint64_t seed_index = 0;   // smallest trial index whose map was injective
    uint32_t from_bits = 0;
    uint32_t to_bits = 0;
    uint64_t trial_seed = 0;   // mix of (stream_seed, round, bucket, seed_index)

    bool identity() const { return from_bits == to_bits; }
    uint64_t encoded_bits() const { return identity() ? 0 : gamma_bits(seed_index + 1); }
};

inline uint64_t reducer_trial_seed(uint64_t stream_seed, uint32_t round, uint64_t bucket,
                                   uint64_t trial) {
    return mix4(stream_seed, round, bucket, trial);
}

// Image of one fingerprint under an entry's reduction. fp must be inside
// [bucket_size * 2^from_bits]; identity entries return fp unchanged.
uint64_t apply_reduction(uint64_t fp, const ReducerEntry& entry, uint32_t bucket_size);

// Applies, in order, every chain entry whose round is <= upto_round.
// A chain holds one entry per round 2..j; ChainError when the chain is
// shorter than upto_round requires.
uint64_t compose_reduce(uint64_t initial_fp, std::span<const ReducerEntry> chain,
                        uint32_t upto_round, uint32_t bucket_size);

// Searches trial indices 0, 1, 2, ... for the first whose map sends every
// fingerprint in fps to a distinct image in [bucket_size * 2^to_bits].
// Returns nullopt when the budget is exhausted (mis-parameterized bucket).
// Empty and singleton sets accept trial 0 immediately.
std::optional<ReducerEntry> find_perfect_reduction(std::span<const uint64_t> fps,
                                                   uint32_t from_bits, uint32_t to_bits,
                                                   uint64_t stream_seed, uint32_t round,
                                                   uint64_t bucket, uint32_t bucket_size,
                                                   uint64_t budget = uint64_t(1) << 24);

}  // namespace retrieval
