#include "retrieval/params.hpp"

#include <algorithm>
#include <cmath>

#include "retrieval/bits.hpp"

namespace retrieval {

namespace {

// Guards against 4.0000000001-style float noise on values that are exact
// integers in theory (powers of two feed most of these formulas).
constexpr double kEps = 1e-9;

uint32_t ceil_int(double x) {
    return static_cast<uint32_t>(std::ceil(x - kEps));
}

uint64_t floor_clamped(double x, uint64_t hi) {
    if (x <= 0.0) return 0;
    double f = std::floor(x + kEps);
    if (f >= static_cast<double>(hi)) return hi;
    return static_cast<uint64_t>(f);
}

}  // namespace

uint64_t RetrievalConfig::bucket_count() const {
    return (n_max + bucket_size - 1) / bucket_size;
}

RetrievalConfig RetrievalConfig::normalized() const {
    RetrievalConfig c = *this;
    if (c.n_max < 2) throw ConfigError("n_max must be >= 2");
    if (c.value_bits < 1 || c.value_bits > 64) throw ConfigError("value_bits must be in [1, 64]");
    uint32_t log_n = bits_for_range(c.n_max);
    if (c.u_bits == 0) c.u_bits = std::min<uint32_t>(64, 3 * log_n);
    if (c.u_bits > 64) throw ConfigError("u_bits must be <= 64");
    if (static_cast<double>(c.u_bits) <= std::log2(static_cast<double>(c.n_max)))
        throw ConfigError("u_bits must exceed log2(n_max)");
    if (c.bucket_size < 1) throw ConfigError("bucket_size must be >= 1");
    if (c.bucket_capacity == 0) c.bucket_capacity = 4 * c.bucket_size;
    if (c.bucket_capacity < c.bucket_size) throw ConfigError("bucket_capacity must be >= bucket_size");
    if (c.slack <= 0.0) throw ConfigError("slack must be positive");
    if (c.t_min < 2) throw ConfigError("t_min must be >= 2");
    // Reductions must stay injective even on a full bucket.
    double cap_room = static_cast<double>(c.bucket_size) * std::pow(2.0, c.t_min);
    if (static_cast<double>(c.bucket_capacity) > cap_room)
        throw ConfigError("bucket_capacity exceeds B * 2^t_min; reductions could not stay injective");
    uint32_t loglog = ceil_int(std::log2(std::max(2.0, std::log2(static_cast<double>(c.n_max)))));
    if (c.offset_bits_threshold == 0) c.offset_bits_threshold = 4 * std::max<uint32_t>(1, loglog);
    if (c.offset_bits_threshold > 62) throw ConfigError("offset_bits_threshold too large");
    if (c.search_budget == 0) throw ConfigError("search_budget must be positive");
    return c;
}

double iterated_log(double x, uint32_t j) {
    for (uint32_t i = 0; i < j; ++i) {
        if (x <= 1.0) throw DomainError("iterated_log: argument dropped to <= 1");
        x = std::log2(x);
    }
    return x;
}

RoundSchedule derive_schedule(const RetrievalConfig& raw) {
    RetrievalConfig cfg = raw.normalized();
    const double n = static_cast<double>(cfg.n_max);
    const double v = static_cast<double>(cfg.value_bits);
    const double log_n = std::log2(n);
    const double ratio = log_n / v;

    RoundSchedule s;
    const uint32_t loglog_bits = ceil_int(2.0 * std::log2(log_n));

    if (ratio < 2.0 - kEps) {
        // Larger v: one round, fingerprints at the floor width, no reductions.
        s.ell = 0;
        s.fp_bits = {cfg.t_min};
        s.capacities = {cfg.n_max};
        s.initial_fp_bits = std::max(cfg.t_min, loglog_bits);
        return s;
    }

    // ell = largest j >= 1 with log^(j)(n) >= ratio. ratio >= 2 keeps every
    // probed intermediate above 1, so iterated_log stays in domain.
    uint32_t ell = 0;
    {
        double it = log_n;  // iterated_log(n, 1)
        uint32_t j = 1;
        while (it >= ratio - kEps) {
            ell = j;
            it = std::log2(it);
            ++j;
        }
    }

    s.ell = ell;
    s.fp_bits.resize(ell + 1);
    for (uint32_t j = 1; j <= ell; ++j)
        s.fp_bits[j - 1] = std::max(cfg.t_min, ceil_int(2.0 * iterated_log(n, j + 1)));
    s.fp_bits[ell] = std::max(cfg.t_min, ceil_int(2.0 * std::log2(ratio)));
    s.initial_fp_bits = std::max(s.fp_bits[0], loglog_bits);

    // Prefix capacities, clamped into [0, n] and forced non-decreasing.
    std::vector<uint64_t> prefix(ell + 2, 0);
    for (uint32_t j = 1; j <= ell; ++j) {
        double share = 1.0 - cfg.slack * iterated_log(n, j + 1) / v;
        prefix[j] = std::max(prefix[j - 1], floor_clamped(n * share, cfg.n_max));
    }
    prefix[ell + 1] = cfg.n_max;

    s.capacities.resize(ell + 1);
    for (uint32_t j = 1; j <= ell + 1; ++j) s.capacities[j - 1] = prefix[j] - prefix[j - 1];
    return s;
}

RoundPlan make_plan(const RoundSchedule& sched) {
    RoundPlan plan;
    plan.initial_width = sched.initial_fp_bits;
    uint64_t cum = 0;
    for (uint32_t j = 1; j <= sched.rounds(); ++j) {
        if (sched.capacities[j - 1] == 0) continue;
        cum += sched.capacities[j - 1];
        plan.stages.push_back({j, sched.capacities[j - 1], cum, sched.width_of_round(j)});
    }
    return plan;
}

}  // namespace retrieval
