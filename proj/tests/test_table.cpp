#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "retrieval/errors.hpp"
#include "retrieval/reference.hpp"
#include "retrieval/table.hpp"
#include "retrieval/workload.hpp"

using namespace retrieval;

namespace {

RetrievalConfig cfg_of(uint64_t n, uint32_t v, uint64_t seed, uint32_t t_min = 6) {
    RetrievalConfig c;
    c.n_max = n;
    c.value_bits = v;
    c.master_seed = seed;
    c.t_min = t_min;
    return c;
}

// builds the table and a shadow, returns both states for inspection
void build_and_sweep(const RetrievalConfig& cfg, IncrementalRetrieval& ir, ShadowMap& shadow) {
    RetrievalConfig norm = cfg.normalized();
    auto pairs = make_pairs(norm.n_max, norm.u_bits, norm.value_bits, mix2(norm.master_seed, 1));
    for (const auto& [k, v] : pairs) {
        ir.insert(k, v);
        shadow.insert(k, v);
    }
    for (const auto& [k, v] : shadow.entries()) REQUIRE(ir.query(k) == v);
}

}  // namespace

TEST_CASE("every answer matches a shadow map, single round") {
    IncrementalRetrieval ir(cfg_of(1 << 12, 8, 3));
    ShadowMap shadow;
    build_and_sweep(ir.config(), ir, shadow);
    CHECK(ir.schedule().ell == 0);
    CHECK(ir.stores().size() == 1);
    CHECK(ir.inserted() == 1 << 12);
}

TEST_CASE("every answer matches a shadow map, multi round") {
    IncrementalRetrieval ir(cfg_of(1 << 12, 5, 4));
    ShadowMap shadow;
    build_and_sweep(ir.config(), ir, shadow);
    CHECK(ir.schedule().ell == 2);
    CHECK(ir.stores().size() == ir.plan().stages.size());
    for (size_t s = 0; s < ir.stores().size(); ++s)
        CHECK(ir.stores()[s].round == ir.plan().stages[s].round);
}

TEST_CASE("every answer matches a shadow map, zero-capacity prefix") {
    IncrementalRetrieval ir(cfg_of(uint64_t(1) << 16, 4, 5, 4));
    ShadowMap shadow;
    build_and_sweep(ir.config(), ir, shadow);
    // rounds without capacity were still applied as reductions at birth
    CHECK(ir.plan().stages.size() == 1);
    CHECK(ir.plan().stages[0].round == 3);
    for (const auto& chain : ir.chains()) {
        REQUIRE(chain.size() == 2);
        CHECK(chain[0].round == 2);
        CHECK_FALSE(chain[0].identity());  // 8 -> 4 carries a stored index
        CHECK(chain[1].identity());        // 4 -> 4 costs nothing
    }
}

TEST_CASE("thirty seeds of a tiny multi-round build stay exact") {
    for (uint64_t seed = 1; seed <= 30; ++seed) {
        CAPTURE(seed);
        RetrievalConfig cfg = cfg_of(64, 3, seed, 2);
        IncrementalRetrieval ir(cfg);
        ShadowMap shadow;
        build_and_sweep(cfg, ir, shadow);
        REQUIRE(ir.schedule().ell == 2);
    }
}

TEST_CASE("updates are visible and isolated") {
    RetrievalConfig cfg = cfg_of(1 << 10, 8, 9);
    IncrementalRetrieval ir(cfg);
    ShadowMap shadow;
    build_and_sweep(cfg, ir, shadow);

    uint64_t i = 0;
    for (const auto& [k, v] : shadow.entries()) {
        if (i++ % 3 == 0) {
            uint64_t nv = (v + 0x5a) & 0xff;
            ir.update(k, nv);
            shadow.update(k, nv);
        }
    }
    for (const auto& [k, v] : shadow.entries()) REQUIRE(ir.query(k) == v);
}

TEST_CASE("rounds advance lazily at stage boundaries") {
    RetrievalConfig cfg = cfg_of(1 << 12, 5, 7).normalized();
    IncrementalRetrieval ir(cfg);
    const auto& stages = ir.plan().stages;
    REQUIRE(stages.size() >= 2);
    uint64_t first_boundary = stages[0].boundary;

    auto pairs = make_pairs(cfg.n_max, cfg.u_bits, cfg.value_bits, 123);
    for (uint64_t i = 0; i < first_boundary; ++i) ir.insert(pairs[i].first, pairs[i].second);
    CHECK(ir.current_round() == stages[0].round);
    CHECK(ir.stores().size() == 1);

    ir.insert(pairs[first_boundary].first, pairs[first_boundary].second);
    CHECK(ir.current_round() == stages[1].round);
    CHECK(ir.stores().size() == 2);

    // earlier keys still answer correctly through the new reductions
    for (uint64_t i = 0; i <= first_boundary; ++i)
        REQUIRE(ir.query(pairs[i].first) == pairs[i].second);
}

TEST_CASE("the capacity limit is hard") {
    RetrievalConfig cfg = cfg_of(64, 8, 2).normalized();
    IncrementalRetrieval ir(cfg);
    auto pairs = make_pairs(65, cfg.u_bits, 8, 77);
    for (uint64_t i = 0; i < 64; ++i) ir.insert(pairs[i].first, pairs[i].second);
    CHECK_THROWS_AS(ir.insert(pairs[64].first, pairs[64].second), CapacityExceeded);
}

TEST_CASE("every insert consumes a value slot, even diverted ones") {
    RetrievalConfig cfg = cfg_of(1 << 12, 5, 11);
    IncrementalRetrieval ir(cfg);
    ShadowMap shadow;
    build_and_sweep(cfg, ir, shadow);
    uint64_t slots_used = 0;
    for (const auto& rs : ir.stores()) slots_used += rs.store.count();
    CHECK(slots_used == ir.inserted());
    CHECK(ir.directory().entry_count() + ir.collisions().size() == ir.inserted());
}

TEST_CASE("a fingerprint collision diverts the second key only") {
    RetrievalConfig cfg = cfg_of(256, 8, 1).normalized();
    // hunt for two keys sharing bucket and initial fingerprint
    std::map<std::pair<uint64_t, uint64_t>, uint64_t> seen;
    uint64_t a = 0, b = 0;
    bool found = false;
    IncrementalRetrieval probe(cfg);
    for (uint64_t k = 0; !found; ++k) {
        auto sig = std::make_pair(probe.key_bucket(k), probe.current_fingerprint(k));
        auto it = seen.find(sig);
        if (it != seen.end()) {
            a = it->second;
            b = k;
            found = true;
        } else {
            seen.emplace(sig, k);
        }
    }

    IncrementalRetrieval ir(cfg);
    ir.insert(a, 1);
    ir.insert(b, 2);
    CHECK(ir.diverted(DivertReason::FingerprintCollision) == 1);
    CHECK(ir.collisions().contains(b));
    CHECK_FALSE(ir.collisions().contains(a));
    CHECK(ir.query(a) == 1);
    CHECK(ir.query(b) == 2);

    // the diverted insert still burned its probe slot first
    CHECK(ir.stores()[0].store.count() == 2);
    CHECK(ir.directory().entry_count() == 1);

    ir.update(b, 9);
    CHECK(ir.query(b) == 9);
    CHECK(ir.query(a) == 1);
}

TEST_CASE("full buckets divert to the collision store") {
    RetrievalConfig cfg = cfg_of(1 << 12, 8, 5);
    cfg.bucket_capacity = 16;  // equal to the bucket size, fills quickly
    IncrementalRetrieval ir(cfg);
    ShadowMap shadow;
    build_and_sweep(cfg, ir, shadow);
    CHECK(ir.diverted(DivertReason::BucketFull) > 0);
}

TEST_CASE("oversized probe offsets divert to the collision store") {
    RetrievalConfig cfg = cfg_of(1 << 12, 8, 6);
    cfg.offset_bits_threshold = 2;  // offsets of 4 and up are too expensive
    IncrementalRetrieval ir(cfg);
    ShadowMap shadow;
    build_and_sweep(cfg, ir, shadow);
    CHECK(ir.diverted(DivertReason::OffsetTooLarge) > 0);
}

TEST_CASE("an exhausted reduction search freezes the bucket, answers stay exact") {
    RetrievalConfig cfg = cfg_of(1 << 12, 5, 13, 2);
    cfg.bucket_size = 64;
    cfg.search_budget = 1;  // only trial zero is allowed
    IncrementalRetrieval ir(cfg);
    ShadowMap shadow;
    build_and_sweep(cfg, ir, shadow);

    uint64_t frozen = 0;
    for (uint64_t b = 0; b < ir.directory().bucket_count(); ++b) {
        const BucketState& st = ir.directory().state(b);
        if (st.frozen_at_round != 0) {
            ++frozen;
            CHECK(ir.chains()[b].size() + 2 == st.frozen_at_round);
            // frozen buckets keep their old width
            CHECK(st.width == ir.schedule().width_of_round(st.frozen_at_round - 1));
        }
    }
    CHECK(frozen > 0);
    CHECK(frozen < ir.directory().bucket_count());
}

TEST_CASE("directory holds exactly the current fingerprints of undiverted keys") {
    RetrievalConfig cfg = cfg_of(1 << 10, 5, 21).normalized();
    IncrementalRetrieval ir(cfg);
    auto pairs = make_pairs(cfg.n_max, cfg.u_bits, cfg.value_bits, 5);
    for (const auto& [k, v] : pairs) ir.insert(k, v);
    for (const auto& [k, v] : pairs) {
        if (ir.collisions().contains(k)) continue;
        DirEntry e;
        REQUIRE(ir.directory().lookup(ir.key_bucket(k), ir.current_fingerprint(k), &e) != nullptr);
    }
}

TEST_CASE("builds are deterministic in the master seed") {
    RetrievalConfig cfg = cfg_of(1 << 10, 5, 33).normalized();
    IncrementalRetrieval ir1(cfg);
    IncrementalRetrieval ir2(cfg);
    auto pairs = make_pairs(cfg.n_max, cfg.u_bits, cfg.value_bits, 8);
    for (const auto& [k, v] : pairs) {
        ir1.insert(k, v);
        ir2.insert(k, v);
    }
    CHECK(ir1.collisions().size() == ir2.collisions().size());
    for (uint64_t b = 0; b < ir1.directory().bucket_count(); ++b) {
        REQUIRE(ir1.directory().state(b).fps == ir2.directory().state(b).fps);
        REQUIRE(ir1.chains()[b].size() == ir2.chains()[b].size());
        for (size_t i = 0; i < ir1.chains()[b].size(); ++i)
            CHECK(ir1.chains()[b][i].seed_index == ir2.chains()[b][i].seed_index);
    }
    for (const auto& [k, v] : pairs) CHECK(ir1.query(k) == ir2.query(k));
}

TEST_CASE("updating a never-inserted key leaves the structure intact") {
    RetrievalConfig cfg = cfg_of(256, 8, 14).normalized();
    IncrementalRetrieval ir(cfg);
    auto pairs = make_pairs(128, cfg.u_bits, cfg.value_bits, 3);
    for (const auto& [k, v] : pairs) ir.insert(k, v);

    // pick absent keys whose fingerprint is not aliased by a resident
    uint64_t tried = 0;
    for (uint64_t k = 0; tried < 50; ++k) {
        bool inserted = false;
        for (const auto& [ik, iv] : pairs)
            if (ik == k) inserted = true;
        if (inserted) continue;
        if (ir.directory().contains(ir.key_bucket(k), ir.current_fingerprint(k))) continue;
        ir.update(k, 0xff);
        ++tried;
    }
    for (const auto& [k, v] : pairs) REQUIRE(ir.query(k) == v);
}
