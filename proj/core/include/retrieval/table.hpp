#pragma once

#include <cstdint>
#include <vector>

#include "retrieval/bucket_directory.hpp"
#include "retrieval/collision_store.hpp"
#include "retrieval/hashing.hpp"
#include "retrieval/params.hpp"
#include "retrieval/reducer.hpp"
#include "retrieval/value_store.hpp"

namespace retrieval {

// One live value store and the round whose insertions it serves.
struct RoundStore {
    uint32_t round = 0;
    ValueStore store;
};

// Incremental retrieval structure: Insert(k, y) / Update(k, y) / Query(k)
// without storing keys. Keys land in per-bucket fingerprint directories plus
// a per-round linear-probing value store; rounds advance lazily as capacity
// prefixes fill, re-hashing all resident fingerprints down to narrower
// widths through per-bucket perfect reductions. Keys whose fingerprint
// collides, whose bucket is full, or whose probe offset is oversized fall
// back to an explicit collision store.
//
// Query(k) for a never-inserted k returns an arbitrary value (promise
// semantics); it never fails.
class IncrementalRetrieval {
  public:
    explicit IncrementalRetrieval(const RetrievalConfig& cfg);

    void insert(uint64_t key, uint64_t value);   // CapacityExceeded at n_max
    void update(uint64_t key, uint64_t value);   // no-op if k was never inserted
    uint64_t query(uint64_t key) const;

    const RetrievalConfig& config() const { return cfg_; }
    const RoundSchedule& schedule() const { return schedule_; }
    const RoundPlan& plan() const { return plan_; }
    uint32_t current_round() const { return plan_.stages[stage_].round; }
    size_t stage_index() const { return stage_; }
    uint64_t inserted() const { return inserted_; }
    const BucketDirectory& directory() const { return directory_; }
    const std::vector<RoundStore>& stores() const { return stores_; }
    const std::vector<std::vector<ReducerEntry>>& chains() const { return chains_; }
    const CollisionStore& collisions() const { return collisions_; }
    uint64_t diverted(DivertReason r) const { return divert_counts_[(int)r]; }

    // Fingerprint of key as seen by its bucket right now (after every
    // reduction applied to that bucket). Exposed for tests and the snapshot
    // audit.
    uint64_t current_fingerprint(uint64_t key) const;
    uint64_t key_bucket(uint64_t key) const { return bucket_of(key, cfg_); }

    // Test hook, forwards to the directory.
    void debug_flip_fp_bit(uint64_t bucket, uint32_t bit) {
        directory_.debug_flip_fp_bit(bucket, bit);
    }

  private:
    IncrementalRetrieval() = default;
    friend IncrementalRetrieval deserialize_snapshot(const std::vector<uint8_t>& bytes);

    void apply_round(uint32_t round);
    void advance_stage();
    const RoundStore* store_for_round(uint32_t round) const;

    RetrievalConfig cfg_;
    RoundSchedule schedule_;
    RoundPlan plan_;
    size_t stage_ = 0;
    uint64_t inserted_ = 0;
    uint64_t seed_reducer_ = 0;
    uint64_t seed_store_ = 0;
    BucketDirectory directory_;
    std::vector<RoundStore> stores_;
    std::vector<std::vector<ReducerEntry>> chains_;  // per bucket, rounds 2..j
    CollisionStore collisions_;
    uint64_t divert_counts_[3] = {0, 0, 0};
};

}  // namespace retrieval
