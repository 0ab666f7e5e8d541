#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "retrieval/params.hpp"

namespace retrieval {

// count distinct keys under 2^u_bits with values under 2^value_bits,
// deterministic in seed.
std::vector<std::pair<uint64_t, uint64_t>> make_pairs(uint64_t count, uint32_t u_bits,
                                                      uint32_t value_bits, uint64_t seed);

struct VerifyOutcome {
    bool ok = true;
    std::string failure;   // first failure, empty when ok
    uint64_t checks = 0;   // query comparisons performed
    uint64_t advances = 0; // round advances crossed during inserts
    uint64_t diverted = 0; // collision store population after the build
};

// End-to-end verification workload, all deterministic in cfg.master_seed:
// cfg.n_max inserts interleaved with extra_ops update/query operations
// (0 = two per key) checked against a shadow map, then a full query sweep,
// then snapshot accounting checks (structure-side measure, byte-side audit,
// serializer tally and byte length must all agree) and a re-query of the
// deserialized copy. check_reductions additionally compares every answer
// immediately before and after each round advance and re-checks per-bucket
// fingerprint distinctness. inject_fault flips one stored fingerprint bit
// after the build; the sweep is then expected to report the corruption
// (ok = false).
VerifyOutcome run_verify(const RetrievalConfig& cfg, uint64_t extra_ops, bool check_reductions,
                         bool inject_fault = false);

}  // namespace retrieval
