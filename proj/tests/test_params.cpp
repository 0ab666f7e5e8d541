#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <vector>

#include "retrieval/errors.hpp"
#include "retrieval/params.hpp"

using namespace retrieval;

namespace {

RetrievalConfig cfg_of(uint64_t n, uint32_t v, uint32_t t_min = 6, double slack = 2.0) {
    RetrievalConfig c;
    c.n_max = n;
    c.value_bits = v;
    c.t_min = t_min;
    c.slack = slack;
    return c;
}

}  // namespace

TEST_CASE("iterated log fixed points") {
    CHECK(iterated_log(65536.0, 0) == doctest::Approx(65536.0));
    CHECK(iterated_log(65536.0, 1) == doctest::Approx(16.0));
    CHECK(iterated_log(65536.0, 2) == doctest::Approx(4.0));
    CHECK(iterated_log(65536.0, 3) == doctest::Approx(2.0));
    CHECK(iterated_log(65536.0, 4) == doctest::Approx(1.0));
    CHECK(iterated_log(2.0, 1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(iterated_log(65536.0, 5), DomainError);
    CHECK_THROWS_AS(iterated_log(1.0, 1), DomainError);
}

TEST_CASE("config normalization fills documented defaults") {
    RetrievalConfig c = cfg_of(1 << 16, 8).normalized();
    CHECK(c.u_bits == 48);
    CHECK(c.bucket_size == 16);
    CHECK(c.bucket_capacity == 64);
    CHECK(c.offset_bits_threshold == 16);
    CHECK(c.bucket_count() == 4096);
    CHECK(c.search_budget == (uint64_t(1) << 24));
}

TEST_CASE("config rejection") {
    CHECK_THROWS_AS(cfg_of(1, 8).normalized(), ConfigError);
    CHECK_THROWS_AS(cfg_of(1 << 16, 0).normalized(), ConfigError);
    CHECK_THROWS_AS(cfg_of(1 << 16, 65).normalized(), ConfigError);
    CHECK_THROWS_AS(cfg_of(1 << 16, 8, 1).normalized(), ConfigError);
    CHECK_THROWS_AS(cfg_of(1 << 16, 8, 6, -1.0).normalized(), ConfigError);

    RetrievalConfig narrow = cfg_of(1 << 16, 8);
    narrow.u_bits = 16;  // equal to log2(n), too small for distinct keys
    CHECK_THROWS_AS(narrow.normalized(), ConfigError);

    RetrievalConfig cap = cfg_of(1 << 16, 8, 2);
    cap.bucket_capacity = 16 * 4 + 1;  // above B * 2^t_min
    CHECK_THROWS_AS(cap.normalized(), ConfigError);

    RetrievalConfig budget = cfg_of(1 << 16, 8);
    budget.search_budget = 0;
    CHECK_THROWS_AS(budget.normalized(), ConfigError);
}

TEST_CASE("ladder at n = 2^18, v = 8, width floor 4") {
    RoundSchedule s = derive_schedule(cfg_of(uint64_t(1) << 18, 8, 4));
    CHECK(s.ell == 2);
    CHECK(s.initial_fp_bits == 9);
    CHECK(s.fp_bits == std::vector<uint32_t>{9, 5, 4});
    CHECK(s.capacities == std::vector<uint64_t>{0, 127138, 135006});
    CHECK(s.width_of_round(1) == 9);
    CHECK(s.width_of_round(2) == 5);
    CHECK(s.width_of_round(3) == 4);
}

TEST_CASE("ladder at n = 2^16, v = 8, width floor 4") {
    RoundSchedule s = derive_schedule(cfg_of(uint64_t(1) << 16, 8, 4));
    CHECK(s.ell == 3);
    CHECK(s.initial_fp_bits == 8);
    CHECK(s.fp_bits == std::vector<uint32_t>{8, 4, 4, 4});
    CHECK(s.capacities == std::vector<uint64_t>{0, 32768, 16384, 16384});
}

TEST_CASE("ladder at n = 2^16, v = 8, defaults") {
    RoundSchedule s = derive_schedule(cfg_of(uint64_t(1) << 16, 8));
    CHECK(s.ell == 3);
    CHECK(s.initial_fp_bits == 8);
    CHECK(s.fp_bits == std::vector<uint32_t>{8, 6, 6, 6});
    CHECK(s.capacities == std::vector<uint64_t>{0, 32768, 16384, 16384});
}

TEST_CASE("single round when v is at least half of log2 n") {
    RoundSchedule s = derive_schedule(cfg_of(uint64_t(1) << 16, 16));
    CHECK(s.ell == 0);
    CHECK(s.rounds() == 1);
    CHECK(s.initial_fp_bits == 8);
    CHECK(s.fp_bits == std::vector<uint32_t>{6});
    CHECK(s.capacities == std::vector<uint64_t>{uint64_t(1) << 16});

    // ratio exactly 2 stays multi-round
    CHECK(derive_schedule(cfg_of(uint64_t(1) << 16, 8)).ell > 0);
    // ratio 16/9 drops below 2
    CHECK(derive_schedule(cfg_of(uint64_t(1) << 16, 9)).ell == 0);
}

TEST_CASE("small v pushes every key into the last round") {
    RoundSchedule s = derive_schedule(cfg_of(uint64_t(1) << 16, 4, 4));
    CHECK(s.ell == 2);
    CHECK(s.initial_fp_bits == 8);
    CHECK(s.fp_bits == std::vector<uint32_t>{8, 4, 4});
    CHECK(s.capacities == std::vector<uint64_t>{0, 0, uint64_t(1) << 16});
}

TEST_CASE("ladder at n = 2^10, v = 5, width floor 3") {
    RoundSchedule s = derive_schedule(cfg_of(1 << 10, 5, 3));
    CHECK(s.ell == 2);
    CHECK(s.initial_fp_bits == 7);
    CHECK(s.fp_bits == std::vector<uint32_t>{7, 4, 3});
    CHECK(s.capacities == std::vector<uint64_t>{0, 314, 710});
}

TEST_CASE("plan keeps occupied rounds only, boundaries cumulative") {
    RoundPlan p = make_plan(derive_schedule(cfg_of(uint64_t(1) << 16, 8)));
    REQUIRE(p.stages.size() == 3);
    CHECK(p.initial_width == 8);
    CHECK(p.stages[0].round == 2);
    CHECK(p.stages[0].capacity == 32768);
    CHECK(p.stages[0].boundary == 32768);
    CHECK(p.stages[0].width == 6);
    CHECK(p.stages[1].round == 3);
    CHECK(p.stages[1].boundary == 49152);
    CHECK(p.stages[2].round == 4);
    CHECK(p.stages[2].boundary == uint64_t(1) << 16);
}

TEST_CASE("schedule invariants across a parameter grid") {
    for (uint32_t log_n = 10; log_n <= 20; log_n += 2) {
        for (uint32_t v = 1; v <= 24; ++v) {
            CAPTURE(log_n);
            CAPTURE(v);
            RetrievalConfig cfg = cfg_of(uint64_t(1) << log_n, v);
            RoundSchedule s = derive_schedule(cfg);
            REQUIRE(s.fp_bits.size() == s.ell + 1);
            REQUIRE(s.capacities.size() == s.ell + 1);

            uint64_t sum = 0;
            for (uint64_t c : s.capacities) sum += c;
            CHECK(sum == cfg.n_max);

            for (uint32_t t : s.fp_bits) CHECK(t >= cfg.t_min);
            CHECK(s.initial_fp_bits >= s.fp_bits[0]);
            for (uint32_t j = 2; j <= s.rounds(); ++j)
                CHECK(s.width_of_round(j) <= s.width_of_round(j - 1));

            double ratio = double(log_n) / double(v);
            if (ratio < 2.0)
                CHECK(s.ell == 0);
            else
                CHECK(s.ell >= 1);

            RoundPlan p = make_plan(s);
            REQUIRE(!p.stages.empty());
            uint64_t prev = 0;
            for (const auto& st : p.stages) {
                CHECK(st.capacity > 0);
                CHECK(st.boundary == prev + st.capacity);
                CHECK(st.width == s.width_of_round(st.round));
                prev = st.boundary;
            }
            CHECK(prev == cfg.n_max);
        }
    }
}

TEST_CASE("more value bits never shrink the ladder inside the multi-round regime") {
    uint32_t prev_ell = 1;
    for (uint32_t v = 4; v <= 8; ++v) {
        RoundSchedule s = derive_schedule(cfg_of(uint64_t(1) << 16, v));
        CHECK(s.ell >= prev_ell);
        prev_ell = s.ell;
    }
}
