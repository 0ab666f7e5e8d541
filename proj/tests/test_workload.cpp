#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <unordered_set>

#include "retrieval/errors.hpp"
#include "retrieval/workload.hpp"

using namespace retrieval;

TEST_CASE("pair generator yields distinct in-range pairs deterministically") {
    auto pairs = make_pairs(5000, 24, 8, 42);
    REQUIRE(pairs.size() == 5000);
    std::unordered_set<uint64_t> keys;
    for (const auto& [k, v] : pairs) {
        CHECK(k < (uint64_t(1) << 24));
        CHECK(v < 256);
        CHECK(keys.insert(k).second);
    }
    auto again = make_pairs(5000, 24, 8, 42);
    CHECK(pairs == again);
    auto other = make_pairs(5000, 24, 8, 43);
    CHECK(pairs != other);
}

TEST_CASE("pair generator guards its inputs") {
    CHECK_THROWS_AS(make_pairs(10, 0, 8, 1), ConfigError);
    CHECK_THROWS_AS(make_pairs(10, 65, 8, 1), ConfigError);
    // more keys than half the universe cannot be sampled distinctly
    CHECK_THROWS_AS(make_pairs(9, 4, 8, 1), ConfigError);
    CHECK(make_pairs(8, 4, 8, 1).size() == 8);
}

TEST_CASE("full-width values survive the mask") {
    auto pairs = make_pairs(32, 64, 64, 7);
    bool any_high = false;
    for (const auto& [k, v] : pairs) any_high |= (v >> 63) != 0;
    CHECK(any_high);
}

TEST_CASE("verification sweep passes on a healthy structure") {
    RetrievalConfig cfg;
    cfg.n_max = 1 << 10;
    cfg.value_bits = 5;
    cfg.t_min = 3;
    cfg.master_seed = 6;
    VerifyOutcome out = run_verify(cfg, 0, true);
    CHECK(out.ok);
    CHECK(out.failure.empty());
    CHECK(out.checks > 2 * cfg.n_max);
    CHECK(out.advances > 0);  // multi-round ladder for these parameters

    VerifyOutcome again = run_verify(cfg, 0, true);
    CHECK(again.checks == out.checks);
    CHECK(again.diverted == out.diverted);
}

TEST_CASE("verification sweep passes without reduction checks") {
    RetrievalConfig cfg;
    cfg.n_max = 1 << 10;
    cfg.value_bits = 8;
    cfg.master_seed = 2;
    VerifyOutcome out = run_verify(cfg, 512, false);
    CHECK(out.ok);
    CHECK(out.checks >= 1024);
}

TEST_CASE("an injected fingerprint flip is caught") {
    RetrievalConfig cfg;
    cfg.n_max = 1 << 10;
    cfg.value_bits = 8;
    cfg.master_seed = 3;
    VerifyOutcome out = run_verify(cfg, 0, false, true);
    CHECK_FALSE(out.ok);
    CHECK(out.failure.find("fault detected") == 0);
}
