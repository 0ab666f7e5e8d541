#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "retrieval/bitstream.hpp"

namespace retrieval {

// Why a key bypassed the fingerprint directory.
enum class DivertReason : uint8_t {
    FingerprintCollision = 0,  // fingerprint already present in the bucket
    BucketFull = 1,            // bucket at capacity
    OffsetTooLarge = 2,        // probe offset would not fit the offset budget
};

// Explicit key-value fallback. Holds every diverted key with its reason;
// checked before the directory on query. Plain hash map in memory, serialized
// as records sorted by key: u_bits + value_bits + 2 bits each.
class CollisionStore {
  public:
    CollisionStore() = default;
    CollisionStore(uint32_t u_bits, uint32_t value_bits)
        : u_bits_(u_bits), value_bits_(value_bits) {}

    void insert(uint64_t key, uint64_t value, DivertReason reason);
    bool contains(uint64_t key) const { return records_.count(key) != 0; }
    uint64_t value_of(uint64_t key) const;
    DivertReason reason_of(uint64_t key) const;
    void update(uint64_t key, uint64_t value);

    uint64_t size() const { return records_.size(); }
    uint64_t record_bits() const { return u_bits_ + value_bits_ + 2; }
    uint64_t total_bits() const { return size() * record_bits(); }
    std::array<uint64_t, 3> reason_counts() const;

    std::vector<uint64_t> sorted_keys() const;

    // Records only (sorted by key); the caller frames the count.
    void write_bits(BitWriter& w) const;
    void read_bits(BitReader& r, uint64_t count);

  private:
    struct Rec {
        uint64_t value;
        DivertReason reason;
    };
    uint32_t u_bits_ = 0;
    uint32_t value_bits_ = 0;
    std::unordered_map<uint64_t, Rec> records_;
};

}  // namespace retrieval
