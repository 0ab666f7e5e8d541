#pragma once

#include <cstdint>
#include <vector>

#include "retrieval/errors.hpp"

namespace retrieval {

// Construction parameters. Defaults target desk-scale builds (n up to ~2^24).
struct RetrievalConfig {
    uint64_t n_max = 0;              // capacity, >= 2
    uint32_t u_bits = 0;             // key width; 0 = default 3*ceil(log2 n_max), capped at 64
    uint32_t value_bits = 0;         // v, in [1, 64]
    uint32_t bucket_size = 16;       // B
    uint32_t bucket_capacity = 0;    // 0 = default 4*B
    double slack = 2.0;              // c, capacity slack multiplier
    uint32_t t_min = 6;              // floor for per-round fingerprint widths, >= 2
    uint32_t offset_bits_threshold = 0;  // 0 = default 4*ceil(log2 log2 n_max)
    uint64_t search_budget = uint64_t(1) << 24;  // reduction trials per bucket
    uint64_t master_seed = 0;

    uint64_t bucket_count() const;       // ceil(n_max / B)
    uint64_t universe_size_log2() const { return u_bits; }

    // Fills zero-valued defaulted fields and checks invariants. Throws ConfigError.
    RetrievalConfig normalized() const;
};

// Per-round fingerprint widths and capacities.
//
// Rounds are numbered 1..ell+1. fp_bits[j-1] is t_j; capacities[j-1] is n_j.
// t_0 (initial_fp_bits) is the width of fingerprints as first drawn, before
// any reduction; round 1 stores fingerprints at width t_0.
struct RoundSchedule {
    uint32_t ell = 0;
    uint32_t initial_fp_bits = 0;           // t_0
    std::vector<uint32_t> fp_bits;          // t_1 .. t_{ell+1}
    std::vector<uint64_t> capacities;       // n_1 .. n_{ell+1}, sums to n_max

    uint32_t rounds() const { return ell + 1; }
    // Width at which round j (1-based) stores fingerprints.
    uint32_t width_of_round(uint32_t j) const {
        return j == 1 ? initial_fp_bits : fp_bits[j - 1];
    }
};

// The realized execution plan: occupied rounds only, in insertion order.
// Shared by the production table, the reference builder and the divert
// estimator so that all three walk identical stages.
struct RoundPlan {
    struct Stage {
        uint32_t round = 0;      // 1-based round index
        uint64_t capacity = 0;   // n_j > 0
        uint64_t boundary = 0;   // cumulative capacity through this stage
        uint32_t width = 0;      // fingerprint width while this round is current
    };
    uint32_t initial_width = 0;  // t_0
    std::vector<Stage> stages;
};

// j-fold iterated base-2 logarithm of x. j = 0 returns x unchanged.
// Throws DomainError when an intermediate value drops to <= 1 with more
// applications requested.
double iterated_log(double x, uint32_t j);

// Derives the round ladder for (n_max, value_bits) under the config's
// slack and width floor:
//
//   ratio      = log2(n) / v
//   single round when ratio < 2: ell = 0, n_1 = n_max, t_1 = t_min
//   otherwise  ell = largest j >= 1 with iterated_log(n, j) >= ratio
//   t_j        = max(t_min, ceil(2 * iterated_log(n, j+1)))   for j <= ell
//   t_{ell+1}  = max(t_min, ceil(2 * log2(ratio)))
//   prefix_j   = clamp(floor(n * (1 - c * iterated_log(n, j+1) / v)), 0, n),
//                made non-decreasing; prefix_{ell+1} = n; n_j = prefix diffs
//   t_0        = max(t_1, ceil(2 * log2(log2 n)))
RoundSchedule derive_schedule(const RetrievalConfig& cfg);

RoundPlan make_plan(const RoundSchedule& sched);

}  // namespace retrieval
