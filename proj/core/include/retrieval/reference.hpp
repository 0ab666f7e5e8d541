#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "retrieval/params.hpp"
#include "retrieval/reducer.hpp"

namespace retrieval {

// Ground-truth associative map for property tests.
class ShadowMap {
  public:
    void insert(uint64_t key, uint64_t value) { map_[key] = value; }
    void update(uint64_t key, uint64_t value) { map_[key] = value; }
    bool contains(uint64_t key) const { return map_.count(key) != 0; }
    uint64_t at(uint64_t key) const { return map_.at(key); }
    uint64_t size() const { return map_.size(); }
    const std::unordered_map<uint64_t, uint64_t>& entries() const { return map_; }

  private:
    std::unordered_map<uint64_t, uint64_t> map_;
};

// Time-inefficient single-table build: one global fingerprint space, global
// universe reductions applied to every table at each round boundary, explicit
// collision set. Exists to pin down semantics, not space; tables are plain
// maps keyed by the current fingerprint.
struct Algorithm1State {
    RetrievalConfig cfg;
    RoundSchedule schedule;
    RoundPlan plan;
    size_t stage = 0;
    uint64_t inserted = 0;
    uint32_t retries_used = 0;
    std::vector<ReducerEntry> chain;  // global reductions, rounds 2..current
    // tables[s]: current fingerprint -> value, for plan stage s
    std::vector<std::unordered_map<uint64_t, uint64_t>> tables;
    std::unordered_map<uint64_t, uint64_t> collisions;  // key -> value
};

// Builds from a batch stream. The whole build restarts with a reseeded
// master (mix of master_seed and the attempt number) whenever a global
// reduction exhausts its trial budget; SearchExhausted after max_retries
// failed attempts.
Algorithm1State alg1_build(const RetrievalConfig& cfg,
                           const std::vector<std::pair<uint64_t, uint64_t>>& stream,
                           uint32_t max_retries = 8);

uint64_t alg1_query(const Algorithm1State& state, uint64_t key);

}  // namespace retrieval
