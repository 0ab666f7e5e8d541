#pragma once

#include <cstdint>
#include <vector>

#include "retrieval/bitstream.hpp"
#include "retrieval/hashing.hpp"

namespace retrieval {

// Fixed-capacity linear-probing value store for one round.
//
// M = ceil(m * (1 + 1/log2^2(n))) slots of value_bits each; keys are never
// stored. An insert probes cyclically from h(k) to the first free slot and
// returns the probe distance p; queries are promise-problem reads of slot
// (h(k) + p) mod M. The occupancy bitmap (1 = live value) carries a
// hierarchical free-slot index so first_empty_at_or_after runs in near
// constant time instead of scanning.
class ValueStore {
  public:
    ValueStore() = default;
    // n_ref drives the slack and block geometry (the structure's n_max).
    ValueStore(uint64_t capacity, uint32_t value_bits, uint64_t n_ref, uint64_t hash_seed);

    // Probe distance p for key k; value stored at (h(k) + p) mod M.
    // Throws StoreFull when count == capacity.
    uint64_t insert(uint64_t key, uint64_t value);

    uint64_t query(uint64_t key, uint64_t offset) const {
        return get_slot((hash_(key) + offset) % slots_);
    }
    void update(uint64_t key, uint64_t offset, uint64_t value) {
        set_slot((hash_(key) + offset) % slots_, value);
    }

    // First free slot at cyclic position >= s. Requires count < M.
    uint64_t first_empty_at_or_after(uint64_t s) const;

    uint64_t capacity() const { return capacity_; }
    uint64_t slots() const { return slots_; }
    uint64_t count() const { return count_; }
    uint32_t value_bits() const { return value_bits_; }
    bool occupied(uint64_t slot) const { return (occupancy_[slot >> 6] >> (slot & 63)) & 1; }
    const FiveWisePoly& hash() const { return hash_; }

    uint64_t value_slot_bits() const { return slots_ * value_bits_; }
    uint64_t occupancy_bits() const { return slots_; }
    uint64_t index_bits() const;

    // Geometry, shared with tests and the snapshot audit: slot count, block
    // width in bits, index fanout, and bit widths of each index level.
    static uint64_t slots_for(uint64_t capacity, uint64_t n_ref);
    static uint64_t block_bits(uint64_t n_ref, uint64_t slots);
    static uint32_t index_fanout(uint64_t n_ref);
    static std::vector<uint64_t> level_plan(uint64_t slots, uint64_t n_ref);

    void write_bits(BitWriter& w) const;  // values, occupancy, index levels
    void read_bits(BitReader& r);
    void restore_hash(const std::array<uint64_t, 5>& coeff);

    // Rebuilds the index from the occupancy bitmap; test support.
    std::vector<std::vector<uint64_t>> rebuild_index() const;
    const std::vector<std::vector<uint64_t>>& index_levels() const { return index_; }

  private:
    uint64_t get_slot(uint64_t slot) const;
    void set_slot(uint64_t slot, uint64_t value);
    void mark_occupied(uint64_t slot);
    uint64_t scan_block_from(uint64_t bit, uint64_t limit) const;

    uint64_t capacity_ = 0;   // m
    uint64_t slots_ = 0;      // M
    uint32_t value_bits_ = 0;
    uint64_t count_ = 0;
    uint64_t block_bits_ = 64;
    uint32_t fanout_ = 2;
    FiveWisePoly hash_;
    std::vector<uint64_t> values_;     // packed value_bits per slot
    std::vector<uint64_t> occupancy_;  // bit = 1 means live
    // index_[0][b] bit = 1 means block b has a free slot; higher levels group
    // fanout_ children per bit.
    std::vector<std::vector<uint64_t>> index_;
    std::vector<uint64_t> level_widths_;   // bits per index level
    std::vector<uint64_t> free_in_block_;  // cached free counts, not serialized
};

}  // namespace retrieval
