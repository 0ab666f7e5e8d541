#pragma once

#include <cstdint>
#include <vector>

#include "retrieval/table.hpp"

namespace retrieval {

// Exact bit counts of the serialized layout, one field per space component.
// fixed_overhead absorbs everything structural: magic, section framing,
// config and schedule fields, per-bucket count headers, chain-length codes,
// record counts and all byte-alignment padding.
struct ComponentBits {
    uint64_t value_slots = 0;
    uint64_t occupancy_index = 0;
    uint64_t directory_fps = 0;
    uint64_t directory_offsets = 0;
    uint64_t directory_round_tags = 0;
    uint64_t reducer_indices = 0;
    uint64_t collision_store = 0;
    uint64_t hash_descriptions = 0;
    uint64_t fixed_overhead = 0;

    uint64_t total() const {
        return value_slots + occupancy_index + directory_fps + directory_offsets +
               directory_round_tags + reducer_indices + collision_store + hash_descriptions +
               fixed_overhead;
    }
    bool operator==(const ComponentBits&) const = default;
};

// Versioned little-endian snapshot: 8-byte magic, then six byte-aligned
// sections (config, schedule, reducers, directory, stores, collisions), each
// framed as tag byte + 64-bit payload bit length + payload + padding.
struct SnapshotBlob {
    std::vector<uint8_t> bytes;
    ComponentBits tally;  // attribution of every bit in bytes
};

SnapshotBlob serialize_snapshot(const IncrementalRetrieval& ir);

// Rebuilds a structure from bytes. Throws SnapshotError on any structural
// inconsistency (bad magic, tag order, length mismatch, schedule mismatch,
// unsorted fingerprints, index bitmap inconsistencies, trailing data).
IncrementalRetrieval deserialize_snapshot(const std::vector<uint8_t>& bytes);

// Re-counts every component by parsing bytes alone (no structure rebuild);
// the audit half of the accounting identity. Total always equals 8 * size.
ComponentBits audit_snapshot(const std::vector<uint8_t>& bytes);

constexpr uint64_t kSnapshotMagic = 0x3130303053535249ull;  // "IRSS0001" LE

}  // namespace retrieval
