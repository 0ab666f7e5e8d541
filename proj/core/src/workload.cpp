#include "retrieval/workload.hpp"

#include <cstdio>
#include <unordered_set>

#include "retrieval/bits.hpp"
#include "retrieval/errors.hpp"
#include "retrieval/metering.hpp"
#include "retrieval/reference.hpp"
#include "retrieval/snapshot.hpp"
#include "retrieval/table.hpp"

namespace retrieval {

namespace {

constexpr uint64_t kPairsTag = 0x50414952;   // key/value stream
constexpr uint64_t kValuesTag = 0x56414c55;  // value halves
constexpr uint64_t kOpsTag = 0x4f505321;     // interleaved op choices

uint64_t width_mask(uint32_t bits) {
    return bits >= 64 ? ~uint64_t(0) : (uint64_t(1) << bits) - 1;
}

std::string hex(uint64_t x) {
    char buf[19];
    snprintf(buf, sizeof buf, "0x%llx", (unsigned long long)x);
    return buf;
}

}  // namespace

std::vector<std::pair<uint64_t, uint64_t>> make_pairs(uint64_t count, uint32_t u_bits,
                                                      uint32_t value_bits, uint64_t seed) {
    if (u_bits == 0 || u_bits > 64) throw ConfigError("u_bits out of range");
    if (u_bits < 63 && count > (uint64_t(1) << u_bits) / 2)
        throw ConfigError("key count too close to universe size");
    uint64_t key_mask = width_mask(u_bits);
    uint64_t value_mask = width_mask(value_bits);
    std::vector<std::pair<uint64_t, uint64_t>> out;
    out.reserve(count);
    std::unordered_set<uint64_t> seen;
    seen.reserve(count * 2);
    for (uint64_t ctr = 0; out.size() < count; ++ctr) {
        uint64_t key = mix2(seed, ctr) & key_mask;
        if (!seen.insert(key).second) continue;
        out.push_back({key, mix2(mix2(seed, kValuesTag), ctr) & value_mask});
    }
    return out;
}

VerifyOutcome run_verify(const RetrievalConfig& raw, uint64_t extra_ops, bool check_reductions,
                         bool inject_fault) {
    VerifyOutcome out;
    RetrievalConfig cfg = raw.normalized();
    const uint64_t n = cfg.n_max;
    auto pairs = make_pairs(n, cfg.u_bits, cfg.value_bits, mix2(cfg.master_seed, kPairsTag));
    uint64_t opseed = mix2(cfg.master_seed, kOpsTag);
    uint64_t value_mask = width_mask(cfg.value_bits);
    if (extra_ops == 0) extra_ops = 2 * n;

    IncrementalRetrieval ir(cfg);
    ShadowMap shadow;

    auto fail = [&](const std::string& msg) {
        if (out.ok) {
            out.ok = false;
            out.failure = msg;
        }
    };
    auto check_key = [&](uint64_t key) {
        uint64_t got = ir.query(key);
        uint64_t want = shadow.at(key);
        ++out.checks;
        if (got != want)
            fail("query mismatch key=" + hex(key) + " got=" + hex(got) + " want=" + hex(want));
        return got == want;
    };

    uint64_t ops_done = 0;
    for (uint64_t i = 0; i < n && out.ok; ++i) {
        bool at_boundary = ir.stage_index() + 1 < ir.plan().stages.size() &&
                           ir.inserted() == ir.plan().stages[ir.stage_index()].boundary;
        if (at_boundary && check_reductions) {
            // answers must survive the reduction bit for bit
            std::vector<uint64_t> before(i);
            for (uint64_t k = 0; k < i; ++k) before[k] = ir.query(pairs[k].first);
            ir.insert(pairs[i].first, pairs[i].second);
            ++out.advances;
            for (uint64_t k = 0; k < i; ++k) {
                uint64_t after = ir.query(pairs[k].first);
                ++out.checks;
                if (after != before[k]) {
                    fail("answer changed across round advance key=" + hex(pairs[k].first));
                    break;
                }
            }
            const BucketDirectory& dir = ir.directory();
            for (uint64_t b = 0; b < dir.bucket_count() && out.ok; ++b) {
                const auto& fps = dir.state(b).fps;
                for (size_t k = 1; k < fps.size(); ++k)
                    if (fps[k - 1] >= fps[k]) {
                        fail("bucket fingerprints not strictly increasing after advance");
                        break;
                    }
            }
        } else {
            if (at_boundary) ++out.advances;
            ir.insert(pairs[i].first, pairs[i].second);
        }
        shadow.insert(pairs[i].first, pairs[i].second);

        uint64_t target = (i + 1) * extra_ops / n;
        for (; ops_done < target && out.ok; ++ops_done) {
            uint64_t pick = mix2(opseed, ops_done);
            uint64_t idx = mix2(pick, 1) % (i + 1);
            if (pick & 1) {
                uint64_t fresh = mix2(pick, 2) & value_mask;
                ir.update(pairs[idx].first, fresh);
                shadow.update(pairs[idx].first, fresh);
            } else {
                check_key(pairs[idx].first);
            }
        }
    }
    out.diverted = ir.collisions().size();

    if (inject_fault) {
        ir.debug_flip_fp_bit(0, 0);
        for (uint64_t i = 0; i < n && out.ok; ++i) check_key(pairs[i].first);
        if (out.ok) fail("injected fault was not detected by the query sweep");
        else out.failure = "fault detected: " + out.failure;
        return out;
    }

    for (uint64_t i = 0; i < n && out.ok; ++i) check_key(pairs[i].first);
    if (!out.ok) return out;

    // accounting identity and round trip
    SpaceReport rep = measure(ir);
    SnapshotBlob blob = serialize_snapshot(ir);
    if (rep.components != blob.tally) {
        fail("measured components disagree with serializer tally");
        return out;
    }
    ComponentBits audited = audit_snapshot(blob.bytes);
    if (audited != blob.tally) {
        fail("snapshot audit disagrees with serializer tally");
        return out;
    }
    if (rep.total_bits != blob.bytes.size() * 8) {
        fail("measured total differs from snapshot byte length");
        return out;
    }
    IncrementalRetrieval loaded = deserialize_snapshot(blob.bytes);
    for (uint64_t i = 0; i < n && out.ok; ++i) {
        uint64_t got = loaded.query(pairs[i].first);
        ++out.checks;
        if (got != shadow.at(pairs[i].first))
            fail("deserialized copy mismatch key=" + hex(pairs[i].first));
    }
    return out;
}

}  // namespace retrieval
