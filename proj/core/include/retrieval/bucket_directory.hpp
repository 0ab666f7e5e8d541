#pragma once

#include <cstdint>
#include <vector>

#include "retrieval/bits.hpp"
#include "retrieval/bitstream.hpp"
#include "retrieval/reducer.hpp"

namespace retrieval {

// Per-bucket triple: sorted fingerprints, their value-store offsets and the
// round each key was inserted in. The three sequences stay aligned; reduce
// permutes all three by the sort order of the new fingerprints.
//
// Serialized coding, measured bit for bit:
//   header   count, fixed ceil(log2(capacity+1)) bits
//   fps      count * fp width (log2 of B * 2^width) bits each, ascending
//   offsets  Elias gamma of (offset + 1)
//   tags     '1' for round 1, else '0' plus (round - 2) in escape width bits
struct BucketState {
    std::vector<uint64_t> fps;
    std::vector<uint64_t> offsets;
    std::vector<uint32_t> rounds;
    uint32_t width = 0;            // current fingerprint width (t_0 at birth)
    uint32_t frozen_at_round = 0;  // 0 = live; else reductions stopped entering this round

    size_t size() const { return fps.size(); }
};

enum class DirInsert { Ok, FingerprintPresent, BucketFull };

struct DirEntry {
    uint64_t offset;
    uint32_t round;
};

class BucketDirectory {
  public:
    BucketDirectory() = default;
    BucketDirectory(uint64_t bucket_count, uint32_t bucket_size, uint32_t bucket_capacity,
                    uint32_t initial_width, uint32_t total_rounds);

    DirInsert insert(uint64_t bucket, uint64_t fp, uint64_t offset, uint32_t round);
    // nullptr when the fingerprint is absent.
    const DirEntry* lookup(uint64_t bucket, uint64_t fp, DirEntry* out) const;
    bool contains(uint64_t bucket, uint64_t fp) const;
    bool full(uint64_t bucket) const;

    // Remaps the bucket's fingerprints through entry, re-sorts the aligned
    // sequences, and narrows the stored width. Throws InjectivityViolation
    // if two fingerprints collide (the reducer search should prevent this).
    void reduce_bucket(uint64_t bucket, const ReducerEntry& entry);

    uint64_t bucket_count() const { return buckets_.size(); }
    uint32_t bucket_size() const { return bucket_size_; }
    uint32_t bucket_capacity() const { return capacity_; }
    uint32_t total_rounds() const { return total_rounds_; }
    uint64_t entry_count() const { return entries_; }
    const BucketState& state(uint64_t bucket) const { return buckets_[bucket]; }
    BucketState& state_mut(uint64_t bucket) { return buckets_[bucket]; }

    uint32_t fp_width(uint64_t bucket) const {
        return bits_for_range(static_cast<uint64_t>(bucket_size_) << buckets_[bucket].width);
    }
    uint32_t header_bits() const { return bits_for_count(capacity_); }
    // Escape payload width for round tags > 1.
    uint32_t tag_escape_bits() const {
        return total_rounds_ <= 1 ? 0 : std::max<uint32_t>(1, bits_for_range(total_rounds_ - 1));
    }
    uint64_t tag_bits(uint32_t round) const { return round == 1 ? 1 : 1 + tag_escape_bits(); }

    // Exact serialized size of one bucket: header + fps + offsets + tags.
    uint64_t encoded_bits(uint64_t bucket) const;

    struct BitTotals {
        uint64_t headers = 0;
        uint64_t fps = 0;
        uint64_t offsets = 0;
        uint64_t tags = 0;
        uint64_t total() const { return headers + fps + offsets + tags; }
    };
    BitTotals bit_totals() const;

    void write_bits(BitWriter& w) const;
    void read_bits(BitReader& r);

    // Test hook: flips one bit of one stored fingerprint so that corruption
    // detection paths can be exercised end to end.
    void debug_flip_fp_bit(uint64_t bucket, uint32_t bit);

  private:
    std::vector<BucketState> buckets_;
    uint32_t bucket_size_ = 0;
    uint32_t capacity_ = 0;
    uint32_t total_rounds_ = 1;
    uint64_t entries_ = 0;
};

}  // namespace retrieval
