#include "retrieval/table.hpp"

#include "retrieval/errors.hpp"

namespace retrieval {

IncrementalRetrieval::IncrementalRetrieval(const RetrievalConfig& cfg)
    : cfg_(cfg.normalized()),
      schedule_(derive_schedule(cfg_)),
      plan_(make_plan(schedule_)),
      seed_reducer_(derive_seed(cfg_.master_seed, SeedStream::Reducer)),
      seed_store_(derive_seed(cfg_.master_seed, SeedStream::ValueStore)),
      directory_(cfg_.bucket_count(), cfg_.bucket_size, cfg_.bucket_capacity,
                 plan_.initial_width, schedule_.rounds()),
      chains_(cfg_.bucket_count()),
      collisions_(cfg_.u_bits, cfg_.value_bits) {
    // Rounds before the first one with capacity still reduce the (empty)
    // directory, so every later fingerprint passes through their maps.
    uint32_t first = plan_.stages[0].round;
    for (uint32_t r = 2; r <= first; ++r) apply_round(r);
    stores_.push_back({first, ValueStore(plan_.stages[0].capacity, cfg_.value_bits, cfg_.n_max,
                                         mix2(seed_store_, first))});
}

void IncrementalRetrieval::apply_round(uint32_t round) {
    uint32_t from = schedule_.width_of_round(round - 1);
    uint32_t to = schedule_.width_of_round(round);
    for (uint64_t b = 0; b < directory_.bucket_count(); ++b) {
        if (chains_[b].size() + 2 != round) continue;  // frozen at an earlier round
        auto found = find_perfect_reduction(directory_.state(b).fps, from, to, seed_reducer_,
                                            round, b, cfg_.bucket_size, cfg_.search_budget);
        if (!found) {
            directory_.state_mut(b).frozen_at_round = round;
            continue;
        }
        directory_.reduce_bucket(b, *found);
        chains_[b].push_back(*found);
    }
}

void IncrementalRetrieval::advance_stage() {
    const auto& stages = plan_.stages;
    uint32_t prev = stages[stage_].round;
    uint32_t next = stages[stage_ + 1].round;
    for (uint32_t r = prev + 1; r <= next; ++r) apply_round(r);
    stores_.push_back({next, ValueStore(stages[stage_ + 1].capacity, cfg_.value_bits, cfg_.n_max,
                                        mix2(seed_store_, next))});
    ++stage_;
}

uint64_t IncrementalRetrieval::current_fingerprint(uint64_t key) const {
    uint64_t b = bucket_of(key, cfg_);
    uint64_t fp = initial_fingerprint(key, cfg_, plan_.initial_width);
    return compose_reduce(fp, chains_[b], (uint32_t)chains_[b].size() + 1, cfg_.bucket_size);
}

const RoundStore* IncrementalRetrieval::store_for_round(uint32_t round) const {
    for (const auto& rs : stores_)
        if (rs.round == round) return &rs;
    return nullptr;
}

void IncrementalRetrieval::insert(uint64_t key, uint64_t value) {
    if (inserted_ >= cfg_.n_max) throw CapacityExceeded("structure is full");
    while (stage_ + 1 < plan_.stages.size() && inserted_ == plan_.stages[stage_].boundary)
        advance_stage();

    uint64_t b = bucket_of(key, cfg_);
    uint64_t fp = current_fingerprint(key);
    uint64_t offset = stores_.back().store.insert(key, value);

    DivertReason reason;
    bool divert = false;
    if (directory_.contains(b, fp)) {
        reason = DivertReason::FingerprintCollision;
        divert = true;
    } else if (directory_.full(b)) {
        reason = DivertReason::BucketFull;
        divert = true;
    } else if (offset >> cfg_.offset_bits_threshold) {
        reason = DivertReason::OffsetTooLarge;
        divert = true;
    }
    if (divert) {
        collisions_.insert(key, value, reason);
        ++divert_counts_[(int)reason];
    } else {
        DirInsert rc = directory_.insert(b, fp, offset, current_round());
        if (rc != DirInsert::Ok) throw DomainError("directory rejected a vetted insert");
    }
    ++inserted_;
}

void IncrementalRetrieval::update(uint64_t key, uint64_t value) {
    if (collisions_.contains(key)) {
        collisions_.update(key, value);
        return;
    }
    uint64_t b = bucket_of(key, cfg_);
    uint64_t fp = current_fingerprint(key);
    DirEntry e;
    if (!directory_.lookup(b, fp, &e)) return;
    for (auto& rs : stores_)
        if (rs.round == e.round) {
            rs.store.update(key, e.offset, value);
            return;
        }
}

uint64_t IncrementalRetrieval::query(uint64_t key) const {
    if (collisions_.contains(key)) return collisions_.value_of(key);
    uint64_t b = bucket_of(key, cfg_);
    uint64_t fp = current_fingerprint(key);
    DirEntry e;
    if (!directory_.lookup(b, fp, &e)) return 0;
    const RoundStore* rs = store_for_round(e.round);
    return rs ? rs->store.query(key, e.offset) : 0;
}

}  // namespace retrieval
