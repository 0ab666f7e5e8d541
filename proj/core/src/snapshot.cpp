#include "retrieval/snapshot.hpp"

#include <bit>

#include "retrieval/errors.hpp"

namespace retrieval {

namespace {

enum SectionTag : uint8_t {
    kConfig = 1,
    kSchedule = 2,
    kReducers = 3,
    kDirectory = 4,
    kStores = 5,
    kCollisions = 6,
};

constexpr uint32_t kFrameBits = 8 + 64;  // tag + payload length

// Payload sizes, computed up front so section lengths can precede payloads.

uint64_t config_payload_bits() {
    // n_max, u, v, B, capacity, slack, t_min, offset threshold, budget,
    // inserted, stage, master seed
    return 64 + 8 + 8 + 32 + 32 + 64 + 8 + 8 + 64 + 64 + 8 + 64;
}

uint64_t schedule_payload_bits(const RoundSchedule& s) {
    return 8 + 8 + (uint64_t)s.rounds() * (8 + 64);
}

uint64_t reducer_payload_bits(const std::vector<std::vector<ReducerEntry>>& chains,
                              uint64_t* index_bits_out) {
    uint64_t headers = 0, indices = 0;
    for (const auto& chain : chains) {
        headers += gamma_bits(chain.size() + 1);
        for (const auto& e : chain) indices += e.encoded_bits();
    }
    if (index_bits_out) *index_bits_out = indices;
    return headers + indices;
}

uint64_t store_payload_bits(const std::vector<RoundStore>& stores) {
    uint64_t bits = 0;
    for (const auto& rs : stores)
        bits += 8 + 64 + kPolyDescriptionBits + rs.store.value_slot_bits() +
                rs.store.occupancy_bits() + rs.store.index_bits();
    return bits;
}

void write_frame(BitWriter& w, uint8_t tag, uint64_t payload_bits) {
    w.put_bits(tag, 8);
    w.put_bits(payload_bits, 64);
}

struct SectionFrame {
    uint8_t tag;
    uint64_t payload_bits;
    uint64_t payload_start;
};

SectionFrame read_frame(BitReader& r, uint8_t expect_tag) {
    SectionFrame f;
    f.tag = (uint8_t)r.get_bits(8);
    if (f.tag != expect_tag) throw SnapshotError("unexpected section tag");
    f.payload_bits = r.get_bits(64);
    if (f.payload_bits > r.remaining()) throw SnapshotError("section length overruns snapshot");
    f.payload_start = r.position();
    return f;
}

void close_frame(BitReader& r, const SectionFrame& f) {
    if (r.position() - f.payload_start != f.payload_bits)
        throw SnapshotError("section payload length mismatch");
    r.align_byte();
}

struct ParsedConfig {
    RetrievalConfig cfg;
    uint64_t inserted;
    uint32_t stage;
};

void write_config(BitWriter& w, const IncrementalRetrieval& ir, size_t stage,
                  ComponentBits& tally) {
    const RetrievalConfig& c = ir.config();
    write_frame(w, kConfig, config_payload_bits());
    w.put_bits(c.n_max, 64);
    w.put_bits(c.u_bits, 8);
    w.put_bits(c.value_bits, 8);
    w.put_bits(c.bucket_size, 32);
    w.put_bits(c.bucket_capacity, 32);
    w.put_bits(std::bit_cast<uint64_t>(c.slack), 64);
    w.put_bits(c.t_min, 8);
    w.put_bits(c.offset_bits_threshold, 8);
    w.put_bits(c.search_budget, 64);
    w.put_bits(ir.inserted(), 64);
    w.put_bits(stage, 8);
    tally.fixed_overhead += kFrameBits + config_payload_bits() - 64;
    w.put_bits(c.master_seed, 64);
    tally.hash_descriptions += 64;
}

ParsedConfig read_config(BitReader& r) {
    SectionFrame f = read_frame(r, kConfig);
    if (f.payload_bits != config_payload_bits()) throw SnapshotError("bad config section size");
    ParsedConfig p;
    p.cfg.n_max = r.get_bits(64);
    p.cfg.u_bits = (uint32_t)r.get_bits(8);
    p.cfg.value_bits = (uint32_t)r.get_bits(8);
    p.cfg.bucket_size = (uint32_t)r.get_bits(32);
    p.cfg.bucket_capacity = (uint32_t)r.get_bits(32);
    p.cfg.slack = std::bit_cast<double>(r.get_bits(64));
    p.cfg.t_min = (uint32_t)r.get_bits(8);
    p.cfg.offset_bits_threshold = (uint32_t)r.get_bits(8);
    p.cfg.search_budget = r.get_bits(64);
    p.inserted = r.get_bits(64);
    p.stage = (uint32_t)r.get_bits(8);
    p.cfg.master_seed = r.get_bits(64);
    close_frame(r, f);
    return p;
}

void write_schedule(BitWriter& w, const RoundSchedule& s, ComponentBits& tally) {
    write_frame(w, kSchedule, schedule_payload_bits(s));
    w.put_bits(s.ell, 8);
    w.put_bits(s.initial_fp_bits, 8);
    for (uint32_t j = 1; j <= s.rounds(); ++j) {
        w.put_bits(s.fp_bits[j - 1], 8);
        w.put_bits(s.capacities[j - 1], 64);
    }
    tally.fixed_overhead += kFrameBits + schedule_payload_bits(s);
}

RoundSchedule read_schedule(BitReader& r) {
    SectionFrame f = read_frame(r, kSchedule);
    RoundSchedule s;
    s.ell = (uint32_t)r.get_bits(8);
    s.initial_fp_bits = (uint32_t)r.get_bits(8);
    if (f.payload_bits != schedule_payload_bits(s)) throw SnapshotError("bad schedule section size");
    if (s.initial_fp_bits > 56) throw SnapshotError("fingerprint width out of range");
    s.fp_bits.resize(s.rounds());
    s.capacities.resize(s.rounds());
    for (uint32_t j = 1; j <= s.rounds(); ++j) {
        s.fp_bits[j - 1] = (uint32_t)r.get_bits(8);
        s.capacities[j - 1] = r.get_bits(64);
        if (s.fp_bits[j - 1] > 56) throw SnapshotError("fingerprint width out of range");
    }
    close_frame(r, f);
    return s;
}

}  // namespace

SnapshotBlob serialize_snapshot(const IncrementalRetrieval& ir) {
    SnapshotBlob blob;
    ComponentBits& tally = blob.tally;
    BitWriter w;

    w.put_bits(kSnapshotMagic, 64);
    tally.fixed_overhead += 64;

    write_config(w, ir, ir.stage_index(), tally);
    tally.fixed_overhead += w.align_byte();
    write_schedule(w, ir.schedule(), tally);
    tally.fixed_overhead += w.align_byte();

    // reducers: per-bucket chain length, then gamma(seed_index + 1) for each
    // non-identity entry (identity entries are implied by equal widths)
    const auto& chains = ir.chains();
    uint64_t index_bits = 0;
    uint64_t reducer_bits = reducer_payload_bits(chains, &index_bits);
    write_frame(w, kReducers, reducer_bits);
    uint64_t mark = w.bit_count();
    for (const auto& chain : chains) {
        w.put_gamma(chain.size() + 1);
        for (const auto& e : chain)
            if (!e.identity()) w.put_gamma(e.seed_index + 1);
    }
    if (w.bit_count() - mark != reducer_bits)
        throw SnapshotError("reducer section size drifted from its declared length");
    tally.reducer_indices += index_bits;
    tally.fixed_overhead += kFrameBits + (reducer_bits - index_bits);
    tally.fixed_overhead += w.align_byte();

    // directory
    auto dir_totals = ir.directory().bit_totals();
    write_frame(w, kDirectory, dir_totals.total());
    mark = w.bit_count();
    ir.directory().write_bits(w);
    if (w.bit_count() - mark != dir_totals.total())
        throw SnapshotError("directory section size drifted from its declared length");
    tally.directory_fps += dir_totals.fps;
    tally.directory_offsets += dir_totals.offsets;
    tally.directory_round_tags += dir_totals.tags;
    tally.fixed_overhead += kFrameBits + dir_totals.headers;
    tally.fixed_overhead += w.align_byte();

    // stores
    write_frame(w, kStores, store_payload_bits(ir.stores()));
    for (const auto& rs : ir.stores()) {
        w.put_bits(rs.round, 8);
        w.put_bits(rs.store.capacity(), 64);
        tally.fixed_overhead += 8 + 64;
        for (uint64_t c : rs.store.hash().coefficients()) w.put_bits(c, 64);
        tally.hash_descriptions += kPolyDescriptionBits;
        mark = w.bit_count();
        rs.store.write_bits(w);
        uint64_t payload = rs.store.value_slot_bits() + rs.store.occupancy_bits() +
                           rs.store.index_bits();
        if (w.bit_count() - mark != payload)
            throw SnapshotError("store section size drifted from its declared length");
        tally.value_slots += rs.store.value_slot_bits();
        tally.occupancy_index += rs.store.occupancy_bits() + rs.store.index_bits();
    }
    tally.fixed_overhead += kFrameBits;
    tally.fixed_overhead += w.align_byte();

    // collisions
    const CollisionStore& cs = ir.collisions();
    write_frame(w, kCollisions, 64 + cs.total_bits());
    w.put_bits(cs.size(), 64);
    cs.write_bits(w);
    tally.collision_store += cs.total_bits();
    tally.fixed_overhead += kFrameBits + 64;
    tally.fixed_overhead += w.align_byte();

    blob.bytes = w.bytes();
    if (tally.total() != w.bit_count())
        throw SnapshotError("component tally does not cover the snapshot");
    return blob;
}

IncrementalRetrieval deserialize_snapshot(const std::vector<uint8_t>& bytes) {
    BitReader r(bytes.data(), bytes.size() * 8);
    if (r.get_bits(64) != kSnapshotMagic) throw SnapshotError("bad snapshot magic");

    ParsedConfig pc = read_config(r);
    r.align_byte();
    RetrievalConfig cfg;
    try {
        cfg = pc.cfg.normalized();
    } catch (const ConfigError& e) {
        throw SnapshotError(std::string("snapshot config invalid: ") + e.what());
    }

    IncrementalRetrieval ir;
    ir.cfg_ = cfg;
    ir.schedule_ = derive_schedule(cfg);
    ir.plan_ = make_plan(ir.schedule_);
    ir.seed_reducer_ = derive_seed(cfg.master_seed, SeedStream::Reducer);
    ir.seed_store_ = derive_seed(cfg.master_seed, SeedStream::ValueStore);

    RoundSchedule stored = read_schedule(r);
    r.align_byte();
    if (stored.ell != ir.schedule_.ell || stored.initial_fp_bits != ir.schedule_.initial_fp_bits ||
        stored.fp_bits != ir.schedule_.fp_bits || stored.capacities != ir.schedule_.capacities)
        throw SnapshotError("stored schedule disagrees with config derivation");

    if (pc.stage >= ir.plan_.stages.size()) throw SnapshotError("stage out of range");
    if (pc.inserted > ir.plan_.stages[pc.stage].boundary)
        throw SnapshotError("inserted count exceeds stage boundary");
    ir.stage_ = pc.stage;
    ir.inserted_ = pc.inserted;
    uint32_t current = ir.plan_.stages[pc.stage].round;

    // reducers
    uint64_t nb = cfg.bucket_count();
    SectionFrame f = read_frame(r, kReducers);
    ir.chains_.resize(nb);
    for (uint64_t b = 0; b < nb; ++b) {
        uint64_t len = r.get_gamma() - 1;
        if (len + 1 > current) throw SnapshotError("reducer chain longer than current round");
        auto& chain = ir.chains_[b];
        chain.reserve(len);
        for (uint32_t round = 2; round <= len + 1; ++round) {
            ReducerEntry e;
            e.round = round;
            e.bucket = b;
            e.from_bits = ir.schedule_.width_of_round(round - 1);
            e.to_bits = ir.schedule_.width_of_round(round);
            e.seed_index = e.identity() ? 0 : r.get_gamma() - 1;
            e.trial_seed = reducer_trial_seed(ir.seed_reducer_, round, b, e.seed_index);
            chain.push_back(e);
        }
    }
    close_frame(r, f);
    r.align_byte();

    // directory, at the widths implied by each bucket's chain
    ir.directory_ = BucketDirectory(nb, cfg.bucket_size, cfg.bucket_capacity,
                                    ir.plan_.initial_width, ir.schedule_.rounds());
    for (uint64_t b = 0; b < nb; ++b) {
        uint32_t reached = (uint32_t)ir.chains_[b].size() + 1;
        ir.directory_.state_mut(b).width = ir.schedule_.width_of_round(reached);
        ir.directory_.state_mut(b).frozen_at_round = reached < current ? reached + 1 : 0;
    }
    f = read_frame(r, kDirectory);
    ir.directory_.read_bits(r);
    close_frame(r, f);
    r.align_byte();

    // stores
    f = read_frame(r, kStores);
    for (size_t s = 0; s <= pc.stage; ++s) {
        uint32_t round = (uint32_t)r.get_bits(8);
        uint64_t capacity = r.get_bits(64);
        if (round != ir.plan_.stages[s].round || capacity != ir.plan_.stages[s].capacity)
            throw SnapshotError("store round/capacity disagrees with the plan");
        std::array<uint64_t, 5> coeff;
        for (auto& c : coeff) c = r.get_bits(64);
        ValueStore vs(capacity, cfg.value_bits, cfg.n_max, mix2(ir.seed_store_, round));
        vs.restore_hash(coeff);
        vs.read_bits(r);
        ir.stores_.push_back({round, std::move(vs)});
    }
    close_frame(r, f);
    r.align_byte();

    // collisions
    f = read_frame(r, kCollisions);
    uint64_t count = r.get_bits(64);
    ir.collisions_ = CollisionStore(cfg.u_bits, cfg.value_bits);
    ir.collisions_.read_bits(r, count);
    close_frame(r, f);
    r.align_byte();

    if (r.remaining() != 0) throw SnapshotError("trailing bytes after last section");

    auto counts = ir.collisions_.reason_counts();
    for (int i = 0; i < 3; ++i) ir.divert_counts_[i] = counts[i];
    return ir;
}

ComponentBits audit_snapshot(const std::vector<uint8_t>& bytes) {
    BitReader r(bytes.data(), bytes.size() * 8);
    ComponentBits tally;
    // close_frame consumes the byte pad as well, so attribute by position
    auto close_and_pad = [&](const SectionFrame& f) {
        uint64_t payload_end = f.payload_start + f.payload_bits;
        close_frame(r, f);
        tally.fixed_overhead += r.position() - payload_end;
    };

    if (r.get_bits(64) != kSnapshotMagic) throw SnapshotError("bad snapshot magic");
    tally.fixed_overhead += 64;

    uint64_t section_start = r.position();
    ParsedConfig pc = read_config(r);
    tally.fixed_overhead += r.position() - section_start - 64;
    tally.hash_descriptions += 64;

    section_start = r.position();
    RoundSchedule sched = read_schedule(r);
    tally.fixed_overhead += r.position() - section_start;

    const RetrievalConfig& cfg = pc.cfg;
    if (cfg.bucket_size == 0 || cfg.bucket_capacity == 0 || cfg.n_max == 0)
        throw SnapshotError("bad config geometry");
    uint64_t nb = (cfg.n_max + cfg.bucket_size - 1) / cfg.bucket_size;

    // reducers: chain-length gammas are framing, seed gammas are payload
    SectionFrame f = read_frame(r, kReducers);
    tally.fixed_overhead += kFrameBits;
    std::vector<uint32_t> reached(nb);
    for (uint64_t b = 0; b < nb; ++b) {
        uint64_t before = r.position();
        uint64_t len = r.get_gamma() - 1;
        tally.fixed_overhead += r.position() - before;
        reached[b] = (uint32_t)len + 1;
        if (reached[b] > sched.rounds()) throw SnapshotError("chain overruns schedule");
        before = r.position();
        for (uint32_t round = 2; round <= len + 1; ++round)
            if (sched.width_of_round(round - 1) != sched.width_of_round(round)) r.get_gamma();
        tally.reducer_indices += r.position() - before;
    }
    close_and_pad(f);

    // directory: per bucket header + fps + offset gammas + tags
    f = read_frame(r, kDirectory);
    tally.fixed_overhead += kFrameBits;
    uint32_t header_w = bits_for_count(cfg.bucket_capacity);
    uint32_t escape = sched.rounds() <= 1 ? 0 : std::max(1u, bits_for_range(sched.rounds() - 1));
    for (uint64_t b = 0; b < nb; ++b) {
        uint64_t count = r.get_bits(header_w);
        tally.fixed_overhead += header_w;
        if (count > cfg.bucket_capacity) throw SnapshotError("bucket count exceeds capacity");
        uint32_t fp_w = bits_for_range((uint64_t)cfg.bucket_size
                                       << sched.width_of_round(reached[b]));
        r.skip(count * fp_w);
        tally.directory_fps += count * fp_w;
        uint64_t before = r.position();
        for (uint64_t i = 0; i < count; ++i) r.get_gamma();
        tally.directory_offsets += r.position() - before;
        before = r.position();
        for (uint64_t i = 0; i < count; ++i)
            if (r.get_bit() == 0) r.skip(escape);
        tally.directory_round_tags += r.position() - before;
    }
    close_and_pad(f);

    // stores
    f = read_frame(r, kStores);
    tally.fixed_overhead += kFrameBits;
    for (size_t s = 0; s <= pc.stage; ++s) {
        r.get_bits(8);
        uint64_t capacity = r.get_bits(64);
        if (capacity == 0) throw SnapshotError("empty store section");
        tally.fixed_overhead += 8 + 64;
        r.skip(kPolyDescriptionBits);
        tally.hash_descriptions += kPolyDescriptionBits;
        uint64_t slots = ValueStore::slots_for(capacity, cfg.n_max);
        uint64_t index_bits = 0;
        for (uint64_t wdt : ValueStore::level_plan(slots, cfg.n_max)) index_bits += wdt;
        r.skip(slots * cfg.value_bits);
        tally.value_slots += slots * cfg.value_bits;
        r.skip(slots + index_bits);
        tally.occupancy_index += slots + index_bits;
    }
    close_and_pad(f);

    // collisions
    f = read_frame(r, kCollisions);
    uint64_t count = r.get_bits(64);
    tally.fixed_overhead += kFrameBits + 64;
    uint64_t rec = cfg.u_bits + cfg.value_bits + 2;
    r.skip(count * rec);
    tally.collision_store += count * rec;
    close_and_pad(f);

    if (r.remaining() != 0) throw SnapshotError("trailing bytes after last section");
    if (tally.total() != bytes.size() * 8)
        throw SnapshotError("audit does not cover the snapshot");
    return tally;
}

}  // namespace retrieval
