#pragma once

#include <string>
#include <vector>

#include "retrieval/snapshot.hpp"

namespace retrieval {

// Space accounting over the serialized layout. components.total() equals the
// snapshot's exact bit length; redundancy is everything above the n*v floor.
struct SpaceReport {
    ComponentBits components;
    uint64_t total_bits = 0;
    uint64_t n_inserted = 0;
    int64_t redundancy_bits = 0;
    double redundancy_per_key = 0.0;
};

// Counts from the live structure, mirroring the snapshot layout bit for bit
// (serialization-free; the byte-side recount lives in audit_snapshot).
SpaceReport measure(const IncrementalRetrieval& ir);

// Flat key=value block, one line per field.
std::string report_text(const SpaceReport& r);

// Least-squares fit of redundancy-per-key against 1 and log2(log2(n)/v).
struct Envelope {
    double c1 = 0.0;
    double c2 = 0.0;
    double rms_residual = 0.0;
};

struct EnvelopePoint {
    uint64_t n;
    uint32_t v;
    double redundancy_per_key;
};

// Needs >= 6 points spanning more than one x value; DegenerateGrid otherwise.
Envelope fit_envelope(const std::vector<EnvelopePoint>& pts);

// The fitted model evaluated as total bits: n*v + c1*n + c2*n*log2(log2(n)/v).
double envelope_bits(uint64_t n, uint32_t v, double c1, double c2);

// Deterministic mean-field estimate of the diverted-key fraction after a
// full build under cfg: integrates, insert by insert, the fingerprint
// collision hazard (resident load times the per-pair collision probability
// accumulated across remix stages) plus the Poisson bucket-overflow tail.
double estimate_divert_fraction(const RetrievalConfig& cfg);

// Mean of log2(1 + offset) over all directory entries.
double mean_log_offset(const IncrementalRetrieval& ir);

inline constexpr const char* kBenchCsvHeader =
    "n,v,seed,bits_values,bits_occupancy,bits_dir_fp,bits_dir_off,bits_dir_tag,"
    "bits_reducers,bits_collisions,bits_hash,bits_fixed,total_bits,"
    "redundancy_per_key,collision_frac,mean_log_offset,ms";

}  // namespace retrieval
