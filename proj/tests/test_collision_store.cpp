#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <set>
#include <vector>

#include "retrieval/bits.hpp"
#include "retrieval/collision_store.hpp"
#include "retrieval/errors.hpp"

using namespace retrieval;

TEST_CASE("insert, lookup and reasons") {
    CollisionStore cs(30, 8);
    CHECK(cs.record_bits() == 30 + 8 + 2);
    CHECK(cs.size() == 0);
    CHECK(cs.total_bits() == 0);

    cs.insert(100, 0xaa, DivertReason::FingerprintCollision);
    cs.insert(7, 0xbb, DivertReason::BucketFull);
    cs.insert(500, 0xcc, DivertReason::OffsetTooLarge);
    CHECK(cs.size() == 3);
    CHECK(cs.total_bits() == 3 * 40);
    CHECK(cs.contains(100));
    CHECK_FALSE(cs.contains(101));
    CHECK(cs.value_of(7) == 0xbb);
    CHECK(cs.reason_of(500) == DivertReason::OffsetTooLarge);

    auto counts = cs.reason_counts();
    CHECK(counts[0] == 1);
    CHECK(counts[1] == 1);
    CHECK(counts[2] == 1);

    cs.update(7, 0x12);
    CHECK(cs.value_of(7) == 0x12);
    CHECK(cs.reason_of(7) == DivertReason::BucketFull);

    CHECK_THROWS_AS(cs.insert(100, 1, DivertReason::BucketFull), DuplicateKey);
    CHECK(cs.sorted_keys() == std::vector<uint64_t>{7, 100, 500});
}

TEST_CASE("a thousand records roundtrip sorted") {
    const uint32_t u = 30, v = 11;
    CollisionStore cs(u, v);
    std::set<uint64_t> keys;
    uint64_t i = 0;
    while (keys.size() < 1000) keys.insert(mix2(5, i++) & ((uint64_t(1) << u) - 1));
    for (uint64_t k : keys)
        cs.insert(k, mix2(k, 9) & ((uint64_t(1) << v) - 1),
                  DivertReason(uint8_t(mix2(k, 2) % 3)));

    BitWriter w;
    cs.write_bits(w);
    CHECK(w.bit_count() == cs.total_bits());

    CollisionStore copy(u, v);
    BitReader r(w.bytes().data(), w.bit_count());
    copy.read_bits(r, cs.size());
    CHECK(r.remaining() == 0);
    CHECK(copy.size() == cs.size());
    for (uint64_t k : keys) {
        REQUIRE(copy.contains(k));
        CHECK(copy.value_of(k) == cs.value_of(k));
        CHECK(copy.reason_of(k) == cs.reason_of(k));
    }
}

TEST_CASE("stream order violations are rejected") {
    CollisionStore cs(10, 4);
    cs.insert(5, 1, DivertReason::FingerprintCollision);
    cs.insert(9, 2, DivertReason::BucketFull);

    // write the two records in descending key order
    BitWriter w;
    w.put_bits(9, 10);
    w.put_bits(2, 4);
    w.put_bits(1, 2);
    w.put_bits(5, 10);
    w.put_bits(1, 4);
    w.put_bits(0, 2);
    CollisionStore bad(10, 4);
    BitReader r(w.bytes().data(), w.bit_count());
    CHECK_THROWS_AS(bad.read_bits(r, 2), SnapshotError);

    // reason tag 3 is unassigned
    BitWriter w2;
    w2.put_bits(5, 10);
    w2.put_bits(1, 4);
    w2.put_bits(3, 2);
    CollisionStore bad2(10, 4);
    BitReader r2(w2.bytes().data(), w2.bit_count());
    CHECK_THROWS_AS(bad2.read_bits(r2, 1), SnapshotError);
}
