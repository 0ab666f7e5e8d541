#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <set>
#include <vector>

#include "retrieval/bucket_directory.hpp"
#include "retrieval/errors.hpp"
#include "retrieval/reducer.hpp"

using namespace retrieval;

TEST_CASE("insert, duplicate and capacity outcomes") {
    BucketDirectory dir(4, 16, 3, 8, 3);
    DirEntry out;

    CHECK(dir.insert(0, 100, 0, 1) == DirInsert::Ok);
    CHECK(dir.insert(0, 100, 5, 1) == DirInsert::FingerprintPresent);
    CHECK(dir.insert(0, 50, 1, 1) == DirInsert::Ok);
    CHECK(dir.insert(0, 200, 2, 2) == DirInsert::Ok);
    CHECK(dir.full(0));
    CHECK(dir.insert(0, 300, 3, 2) == DirInsert::BucketFull);
    CHECK(dir.entry_count() == 3);

    REQUIRE(dir.lookup(0, 50, &out) != nullptr);
    CHECK(out.offset == 1);
    CHECK(out.round == 1);
    REQUIRE(dir.lookup(0, 200, &out) != nullptr);
    CHECK(out.round == 2);
    CHECK(dir.lookup(0, 300, &out) == nullptr);
    CHECK(dir.lookup(1, 100, &out) == nullptr);
    CHECK(dir.contains(0, 100));
    CHECK_FALSE(dir.contains(0, 101));

    // fingerprints stay sorted
    const BucketState& b = dir.state(0);
    CHECK(b.fps == std::vector<uint64_t>{50, 100, 200});
    CHECK(b.offsets == std::vector<uint64_t>{1, 0, 2});

    CHECK_THROWS_AS(dir.insert(1, uint64_t(16) << 8, 0, 1), RangeError);
}

TEST_CASE("per-bucket encoded size follows the coding formula") {
    BucketDirectory dir(2, 16, 64, 8, 4);
    CHECK(dir.header_bits() == 7);           // counts in [0, 64]
    CHECK(dir.tag_escape_bits() == 2);       // rounds 2..4 escape payload
    CHECK(dir.tag_bits(1) == 1);
    CHECK(dir.tag_bits(3) == 3);
    CHECK(dir.fp_width(0) == 12);            // log2(16 * 2^8)

    CHECK(dir.encoded_bits(0) == 7);         // empty: header only
    dir.insert(0, 9, 0, 1);
    CHECK(dir.encoded_bits(0) == 7 + 12 + gamma_bits(1) + 1);
    dir.insert(0, 10, 4, 3);
    CHECK(dir.encoded_bits(0) == 7 + 2 * 12 + gamma_bits(1) + gamma_bits(5) + 1 + 3);

    BucketDirectory::BitTotals t = dir.bit_totals();
    CHECK(t.headers == 2 * 7);
    CHECK(t.fps == 2 * 12);
    CHECK(t.offsets == gamma_bits(1) + gamma_bits(5));
    CHECK(t.tags == 1 + 3);
    CHECK(t.total() == dir.encoded_bits(0) + dir.encoded_bits(1));
}

TEST_CASE("single-round directories use a one-bit tag and no escape") {
    BucketDirectory dir(1, 16, 64, 8, 1);
    CHECK(dir.tag_escape_bits() == 0);
    CHECK(dir.tag_bits(1) == 1);
    dir.insert(0, 3, 2, 1);
    CHECK(dir.encoded_bits(0) == dir.header_bits() + dir.fp_width(0) + gamma_bits(3) + 1);
}

TEST_CASE("reduction remaps, re-sorts and narrows a bucket") {
    BucketDirectory dir(1, 16, 64, 8, 3);
    std::vector<uint64_t> fps{5, 900, 2000, 4000};
    for (size_t i = 0; i < fps.size(); ++i)
        REQUIRE(dir.insert(0, fps[i], i, i % 2 + 1) == DirInsert::Ok);

    auto entry = find_perfect_reduction(fps, 8, 4, 123, 2, 0, 16);
    REQUIRE(entry.has_value());
    dir.reduce_bucket(0, *entry);

    const BucketState& b = dir.state(0);
    CHECK(b.width == 4);
    CHECK(dir.fp_width(0) == 8);
    REQUIRE(b.size() == 4);
    std::set<uint64_t> expected_images;
    for (uint64_t fp : fps) expected_images.insert(apply_reduction(fp, *entry, 16));
    std::set<uint64_t> got(b.fps.begin(), b.fps.end());
    CHECK(got == expected_images);
    for (size_t i = 1; i < b.size(); ++i) CHECK(b.fps[i] > b.fps[i - 1]);

    // offsets and rounds follow their fingerprints through the permutation
    DirEntry out;
    for (size_t i = 0; i < fps.size(); ++i) {
        uint64_t img = apply_reduction(fps[i], *entry, 16);
        REQUIRE(dir.lookup(0, img, &out) != nullptr);
        CHECK(out.offset == i);
        CHECK(out.round == i % 2 + 1);
    }
}

TEST_CASE("identity reduction only narrows the declared width") {
    BucketDirectory dir(1, 16, 64, 6, 3);
    dir.insert(0, 77, 1, 1);
    ReducerEntry e{2, 0, 0, 6, 6, 99};
    dir.reduce_bucket(0, e);
    CHECK(dir.state(0).width == 6);
    CHECK(dir.state(0).fps == std::vector<uint64_t>{77});
}

TEST_CASE("a merging reduction is rejected") {
    BucketDirectory dir(1, 2, 8, 8, 3);
    // craft two fingerprints that collide under a specific entry by brute force
    bool exercised = false;
    for (uint64_t trial = 0; trial < 3000 && !exercised; ++trial) {
        ReducerEntry e{2, 0, trial, 8, 2, mix4(5, 2, 0, trial)};
        for (uint64_t a = 0; a < 64 && !exercised; ++a) {
            for (uint64_t b = a + 1; b < 64; ++b) {
                if (apply_reduction(a, e, 2) == apply_reduction(b, e, 2)) {
                    BucketDirectory d(1, 2, 8, 8, 3);
                    d.insert(0, a, 0, 1);
                    d.insert(0, b, 1, 1);
                    CHECK_THROWS_AS(d.reduce_bucket(0, e), InjectivityViolation);
                    exercised = true;
                    break;
                }
            }
        }
    }
    CHECK(exercised);
}

TEST_CASE("serialized buckets roundtrip") {
    const uint64_t buckets = 8;
    BucketDirectory dir(buckets, 16, 64, 8, 4);
    uint64_t next = 1;
    for (uint64_t b = 0; b < buckets; ++b) {
        for (uint64_t i = 0; i < (b * 7) % 20; ++i) {
            uint64_t fp = mix2(b, i) % (uint64_t(16) << 8);
            dir.insert(b, fp, mix2(i, b) % 50, uint32_t(next++ % 4) + 1);
        }
    }

    BitWriter w;
    dir.write_bits(w);
    CHECK(w.bit_count() == dir.bit_totals().total());

    BucketDirectory copy(buckets, 16, 64, 8, 4);
    BitReader r(w.bytes().data(), w.bit_count());
    copy.read_bits(r);
    CHECK(r.remaining() == 0);
    CHECK(copy.entry_count() == dir.entry_count());
    for (uint64_t b = 0; b < buckets; ++b) {
        CHECK(copy.state(b).fps == dir.state(b).fps);
        CHECK(copy.state(b).offsets == dir.state(b).offsets);
        CHECK(copy.state(b).rounds == dir.state(b).rounds);
    }
}

TEST_CASE("unsorted or oversized payloads are rejected on read") {
    BucketDirectory dir(1, 16, 4, 8, 2);
    dir.insert(0, 10, 0, 1);
    dir.insert(0, 20, 1, 2);
    BitWriter w;
    dir.write_bits(w);

    // count larger than capacity
    BitWriter bad;
    bad.put_bits(5, dir.header_bits());
    BucketDirectory c1(1, 16, 4, 8, 2);
    BitReader r1(bad.bytes().data(), bad.bit_count());
    CHECK_THROWS_AS(c1.read_bits(r1), SnapshotError);

    // fingerprints out of order: write the same two entries swapped
    BitWriter swapped;
    swapped.put_bits(2, dir.header_bits());
    swapped.put_bits(20, dir.fp_width(0));
    swapped.put_bits(10, dir.fp_width(0));
    swapped.put_gamma(1);
    swapped.put_gamma(2);
    swapped.put_bit(1);
    swapped.put_bit(1);
    BucketDirectory c2(1, 16, 4, 8, 2);
    BitReader r2(swapped.bytes().data(), swapped.bit_count());
    CHECK_THROWS_AS(c2.read_bits(r2), SnapshotError);
}

TEST_CASE("fault hook really flips a stored fingerprint") {
    BucketDirectory dir(2, 16, 8, 8, 2);
    dir.insert(1, 100, 0, 1);
    std::vector<uint64_t> before = dir.state(1).fps;
    dir.debug_flip_fp_bit(0, 3);  // walks to the first non-empty bucket
    CHECK(dir.state(1).fps != before);
}
