#include "retrieval/collision_store.hpp"

#include <algorithm>

#include "retrieval/errors.hpp"

namespace retrieval {

void CollisionStore::insert(uint64_t key, uint64_t value, DivertReason reason) {
    auto [it, fresh] = records_.try_emplace(key, Rec{value, reason});
    if (!fresh) throw DuplicateKey("key already in collision store");
    (void)it;
}

uint64_t CollisionStore::value_of(uint64_t key) const {
    auto it = records_.find(key);
    if (it == records_.end()) throw DomainError("key not in collision store");
    return it->second.value;
}

DivertReason CollisionStore::reason_of(uint64_t key) const {
    auto it = records_.find(key);
    if (it == records_.end()) throw DomainError("key not in collision store");
    return it->second.reason;
}

void CollisionStore::update(uint64_t key, uint64_t value) {
    auto it = records_.find(key);
    if (it == records_.end()) throw DomainError("key not in collision store");
    it->second.value = value;
}

std::array<uint64_t, 3> CollisionStore::reason_counts() const {
    std::array<uint64_t, 3> counts{0, 0, 0};
    for (const auto& [k, rec] : records_) ++counts[(int)rec.reason];
    return counts;
}

std::vector<uint64_t> CollisionStore::sorted_keys() const {
    std::vector<uint64_t> keys;
    keys.reserve(records_.size());
    for (const auto& [k, rec] : records_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    return keys;
}

void CollisionStore::write_bits(BitWriter& w) const {
    for (uint64_t k : sorted_keys()) {
        const Rec& rec = records_.at(k);
        w.put_bits(k, u_bits_);
        w.put_bits(rec.value, value_bits_);
        w.put_bits((uint64_t)rec.reason, 2);
    }
}

void CollisionStore::read_bits(BitReader& r, uint64_t count) {
    records_.clear();
    uint64_t prev = 0;
    for (uint64_t i = 0; i < count; ++i) {
        uint64_t key = r.get_bits(u_bits_);
        uint64_t value = r.get_bits(value_bits_);
        uint64_t reason = r.get_bits(2);
        if (reason > 2) throw SnapshotError("bad divert reason");
        if (i > 0 && key <= prev) throw SnapshotError("collision records out of order");
        prev = key;
        records_.emplace(key, Rec{value, (DivertReason)reason});
    }
}

}  // namespace retrieval
