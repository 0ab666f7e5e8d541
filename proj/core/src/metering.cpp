#include "retrieval/metering.hpp"

#include <cmath>
#include <sstream>

#include "retrieval/errors.hpp"

namespace retrieval {

namespace {

// Mirrors the snapshot's section layout: magic, then per section a frame
// (tag + 64-bit length), the payload, and padding to the next byte.
struct LayoutWalk {
    uint64_t pos = 0;
    uint64_t pad_total = 0;

    void magic() { pos += 64; }
    void section(uint64_t payload_bits) {
        pos += 8 + 64 + payload_bits;
        uint64_t pad = (8 - (pos & 7)) & 7;
        pad_total += pad;
        pos += pad;
    }
};

double poisson_tail(double lambda, uint64_t cap) {
    if (lambda <= 0.0) return 0.0;
    // Beyond this point the true tail is under ~1e-12, far below any
    // tolerance the estimate feeds into.
    if ((double)cap > 4.0 * lambda + 40.0) return 0.0;
    double log_pmf = -lambda + (double)cap * std::log(lambda) - std::lgamma((double)cap + 1.0);
    double pmf = std::exp(log_pmf);
    double total = 0.0;
    for (uint64_t k = cap; k < cap + 400; ++k) {
        total += pmf;
        pmf *= lambda / (double)(k + 1);
        if (pmf < 1e-18 * (total + 1e-300)) break;
    }
    return total;
}

}  // namespace

SpaceReport measure(const IncrementalRetrieval& ir) {
    SpaceReport rep;
    ComponentBits& c = rep.components;
    const RetrievalConfig& cfg = ir.config();

    uint64_t config_payload = 64 + 8 + 8 + 32 + 32 + 64 + 8 + 8 + 64 + 64 + 8 + 64;
    uint64_t schedule_payload = 8 + 8 + (uint64_t)ir.schedule().rounds() * (8 + 64);

    uint64_t chain_headers = 0;
    for (const auto& chain : ir.chains()) {
        chain_headers += gamma_bits(chain.size() + 1);
        for (const auto& e : chain) c.reducer_indices += e.encoded_bits();
    }

    auto dir = ir.directory().bit_totals();
    c.directory_fps = dir.fps;
    c.directory_offsets = dir.offsets;
    c.directory_round_tags = dir.tags;

    uint64_t store_frame_fields = 0;
    for (const auto& rs : ir.stores()) {
        c.value_slots += rs.store.value_slot_bits();
        c.occupancy_index += rs.store.occupancy_bits() + rs.store.index_bits();
        store_frame_fields += 8 + 64;
    }
    c.hash_descriptions = 64 + (uint64_t)ir.stores().size() * kPolyDescriptionBits;

    c.collision_store = ir.collisions().total_bits();

    LayoutWalk walk;
    walk.magic();
    walk.section(config_payload);
    walk.section(schedule_payload);
    walk.section(chain_headers + c.reducer_indices);
    walk.section(dir.total());
    uint64_t stores_payload = store_frame_fields +
                              (uint64_t)ir.stores().size() * kPolyDescriptionBits +
                              c.value_slots + c.occupancy_index;
    walk.section(stores_payload);
    walk.section(64 + c.collision_store);

    c.fixed_overhead = 64                       // magic
                       + 6 * (8 + 64)           // section frames
                       + (config_payload - 64)  // config fields less master seed
                       + schedule_payload + chain_headers + dir.headers + store_frame_fields +
                       64  // collision record count
                       + walk.pad_total;

    rep.total_bits = c.total();
    rep.n_inserted = ir.inserted();
    rep.redundancy_bits =
        (int64_t)rep.total_bits - (int64_t)(rep.n_inserted * cfg.value_bits);
    rep.redundancy_per_key =
        rep.n_inserted == 0 ? 0.0 : (double)rep.redundancy_bits / (double)rep.n_inserted;
    return rep;
}

std::string report_text(const SpaceReport& r) {
    std::ostringstream out;
    const ComponentBits& c = r.components;
    out << "bits_values=" << c.value_slots << "\n"
        << "bits_occupancy=" << c.occupancy_index << "\n"
        << "bits_dir_fp=" << c.directory_fps << "\n"
        << "bits_dir_off=" << c.directory_offsets << "\n"
        << "bits_dir_tag=" << c.directory_round_tags << "\n"
        << "bits_reducers=" << c.reducer_indices << "\n"
        << "bits_collisions=" << c.collision_store << "\n"
        << "bits_hash=" << c.hash_descriptions << "\n"
        << "bits_fixed=" << c.fixed_overhead << "\n"
        << "total_bits=" << r.total_bits << "\n"
        << "n_inserted=" << r.n_inserted << "\n"
        << "redundancy_bits=" << r.redundancy_bits << "\n"
        << "redundancy_per_key=" << r.redundancy_per_key << "\n";
    return out.str();
}

Envelope fit_envelope(const std::vector<EnvelopePoint>& pts) {
    if (pts.size() < 6) throw DegenerateGrid("envelope fit needs at least 6 points");
    double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    std::vector<double> xs(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        double log_n = std::log2((double)pts[i].n);
        double x = std::log2(log_n / (double)pts[i].v);
        xs[i] = x;
        double y = pts[i].redundancy_per_key;
        s0 += 1.0;
        s1 += x;
        s2 += x * x;
        t0 += y;
        t1 += x * y;
    }
    double det = s0 * s2 - s1 * s1;
    if (std::abs(det) < 1e-9 * (1.0 + s0 * s2))
        throw DegenerateGrid("envelope fit grid has no spread in log2(log2(n)/v)");
    Envelope e;
    e.c1 = (s2 * t0 - s1 * t1) / det;
    e.c2 = (s0 * t1 - s1 * t0) / det;
    double ss = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        double resid = pts[i].redundancy_per_key - e.c1 - e.c2 * xs[i];
        ss += resid * resid;
    }
    e.rms_residual = std::sqrt(ss / (double)pts.size());
    return e;
}

double envelope_bits(uint64_t n, uint32_t v, double c1, double c2) {
    double log_n = std::log2((double)n);
    return (double)n * (double)v + c1 * (double)n +
           c2 * (double)n * std::log2(log_n / (double)v);
}

double estimate_divert_fraction(const RetrievalConfig& raw) {
    RetrievalConfig cfg = raw.normalized();
    RoundSchedule sched = derive_schedule(cfg);
    RoundPlan plan = make_plan(sched);
    double nb = (double)cfg.bucket_count();
    double bsz = (double)cfg.bucket_size;

    double residents = 0.0;
    double expected_diverts = 0.0;
    for (const auto& stage : plan.stages) {
        // Per resident pair: collide at the initial draw or at any
        // width-changing remix up to this round. Equal-width rounds keep the
        // identity map and cannot introduce new collisions.
        double pair_collision = 1.0 / (bsz * std::pow(2.0, (double)plan.initial_width));
        for (uint32_t rnd = 2; rnd <= stage.round; ++rnd)
            if (sched.width_of_round(rnd - 1) != sched.width_of_round(rnd))
                pair_collision += 1.0 / (bsz * std::pow(2.0, (double)sched.width_of_round(rnd)));

        uint64_t store_slots = ValueStore::slots_for(stage.capacity, cfg.n_max);
        bool offsets_can_overflow =
            cfg.offset_bits_threshold < 63 &&
            store_slots > (uint64_t(1) << cfg.offset_bits_threshold);

        for (uint64_t i = 0; i < stage.capacity; ++i) {
            double lambda = residents / nb;
            double p = lambda * pair_collision + poisson_tail(lambda, cfg.bucket_capacity);
            if (offsets_can_overflow) {
                // Offsets are bounded by the store size; with the default
                // threshold this branch is unreachable. Crude exponential
                // probe-tail bound, kept only for exotic configs.
                double fill = (double)i / (double)store_slots;
                if (fill < 1.0)
                    p += std::exp(-(1.0 - fill) * std::pow(2.0, (double)cfg.offset_bits_threshold));
            }
            if (p > 1.0) p = 1.0;
            expected_diverts += p;
            residents += 1.0 - p;
        }
    }
    return expected_diverts / (double)cfg.n_max;
}

double mean_log_offset(const IncrementalRetrieval& ir) {
    const BucketDirectory& dir = ir.directory();
    double total = 0.0;
    uint64_t count = 0;
    for (uint64_t b = 0; b < dir.bucket_count(); ++b) {
        const BucketState& st = dir.state(b);
        for (uint64_t off : st.offsets) total += std::log2(1.0 + (double)off);
        count += st.size();
    }
    return count == 0 ? 0.0 : total / (double)count;
}

}  // namespace retrieval
