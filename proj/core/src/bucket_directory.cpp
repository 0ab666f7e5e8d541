#include "retrieval/bucket_directory.hpp"

#include <algorithm>
#include <numeric>

#include "retrieval/errors.hpp"

namespace retrieval {

BucketDirectory::BucketDirectory(uint64_t bucket_count, uint32_t bucket_size,
                                 uint32_t bucket_capacity, uint32_t initial_width,
                                 uint32_t total_rounds)
    : buckets_(bucket_count),
      bucket_size_(bucket_size),
      capacity_(bucket_capacity),
      total_rounds_(total_rounds) {
    for (auto& b : buckets_) b.width = initial_width;
}

DirInsert BucketDirectory::insert(uint64_t bucket, uint64_t fp, uint64_t offset, uint32_t round) {
    BucketState& b = buckets_[bucket];
    if ((static_cast<uint64_t>(bucket_size_) << b.width) <= fp)
        throw RangeError("dir insert: fingerprint outside bucket range");
    auto it = std::lower_bound(b.fps.begin(), b.fps.end(), fp);
    if (it != b.fps.end() && *it == fp) return DirInsert::FingerprintPresent;
    if (b.size() >= capacity_) return DirInsert::BucketFull;
    size_t pos = static_cast<size_t>(it - b.fps.begin());
    b.fps.insert(it, fp);
    b.offsets.insert(b.offsets.begin() + pos, offset);
    b.rounds.insert(b.rounds.begin() + pos, round);
    ++entries_;
    return DirInsert::Ok;
}

const DirEntry* BucketDirectory::lookup(uint64_t bucket, uint64_t fp, DirEntry* out) const {
    const BucketState& b = buckets_[bucket];
    auto it = std::lower_bound(b.fps.begin(), b.fps.end(), fp);
    if (it == b.fps.end() || *it != fp) return nullptr;
    size_t pos = static_cast<size_t>(it - b.fps.begin());
    out->offset = b.offsets[pos];
    out->round = b.rounds[pos];
    return out;
}

bool BucketDirectory::contains(uint64_t bucket, uint64_t fp) const {
    const BucketState& b = buckets_[bucket];
    return std::binary_search(b.fps.begin(), b.fps.end(), fp);
}

bool BucketDirectory::full(uint64_t bucket) const {
    return buckets_[bucket].size() >= capacity_;
}

void BucketDirectory::reduce_bucket(uint64_t bucket, const ReducerEntry& entry) {
    BucketState& b = buckets_[bucket];
    if (entry.identity()) {
        b.width = entry.to_bits;
        return;
    }
    size_t n = b.size();
    std::vector<uint64_t> images(n);
    for (size_t i = 0; i < n; ++i) images[i] = apply_reduction(b.fps[i], entry, bucket_size_);

    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t c) { return images[a] < images[c]; });

    std::vector<uint64_t> new_fps(n), new_offsets(n);
    std::vector<uint32_t> new_rounds(n);
    for (size_t i = 0; i < n; ++i) {
        new_fps[i] = images[order[i]];
        new_offsets[i] = b.offsets[order[i]];
        new_rounds[i] = b.rounds[order[i]];
    }
    for (size_t i = 1; i < n; ++i)
        if (new_fps[i] == new_fps[i - 1])
            throw InjectivityViolation("reduce_bucket: reduction merged two fingerprints");

    b.fps = std::move(new_fps);
    b.offsets = std::move(new_offsets);
    b.rounds = std::move(new_rounds);
    b.width = entry.to_bits;
}

uint64_t BucketDirectory::encoded_bits(uint64_t bucket) const {
    const BucketState& b = buckets_[bucket];
    uint64_t bits = header_bits();
    bits += b.size() * fp_width(bucket);
    for (uint64_t off : b.offsets) bits += gamma_bits(off + 1);
    for (uint32_t r : b.rounds) bits += tag_bits(r);
    return bits;
}

BucketDirectory::BitTotals BucketDirectory::bit_totals() const {
    BitTotals t;
    for (uint64_t i = 0; i < buckets_.size(); ++i) {
        const BucketState& b = buckets_[i];
        t.headers += header_bits();
        t.fps += b.size() * fp_width(i);
        for (uint64_t off : b.offsets) t.offsets += gamma_bits(off + 1);
        for (uint32_t r : b.rounds) t.tags += tag_bits(r);
    }
    return t;
}

void BucketDirectory::write_bits(BitWriter& w) const {
    for (uint64_t i = 0; i < buckets_.size(); ++i) {
        const BucketState& b = buckets_[i];
        w.put_bits(b.size(), header_bits());
        uint32_t fpw = fp_width(i);
        for (uint64_t fp : b.fps) w.put_bits(fp, fpw);
        for (uint64_t off : b.offsets) w.put_gamma(off + 1);
        for (uint32_t r : b.rounds) {
            if (r == 1) {
                w.put_bit(1);
            } else {
                w.put_bit(0);
                w.put_bits(r - 2, tag_escape_bits());
            }
        }
    }
}

void BucketDirectory::read_bits(BitReader& r) {
    entries_ = 0;
    for (uint64_t i = 0; i < buckets_.size(); ++i) {
        BucketState& b = buckets_[i];
        uint64_t count = r.get_bits(header_bits());
        if (count > capacity_) throw SnapshotError("bucket count exceeds capacity");
        b.fps.resize(count);
        b.offsets.resize(count);
        b.rounds.resize(count);
        uint32_t fpw = fp_width(i);
        for (auto& fp : b.fps) fp = r.get_bits(fpw);
        for (size_t k = 1; k < b.fps.size(); ++k)
            if (b.fps[k] <= b.fps[k - 1]) throw SnapshotError("bucket fingerprints not sorted");
        for (auto& off : b.offsets) off = r.get_gamma() - 1;
        for (auto& rd : b.rounds) {
            if (r.get_bit() == 1) {
                rd = 1;
            } else {
                rd = static_cast<uint32_t>(r.get_bits(tag_escape_bits())) + 2;
                if (rd > total_rounds_) throw SnapshotError("round tag out of range");
            }
        }
        entries_ += count;
    }
}

void BucketDirectory::debug_flip_fp_bit(uint64_t bucket, uint32_t bit) {
    for (uint64_t i = 0; i < buckets_.size(); ++i) {
        uint64_t b = (bucket + i) % buckets_.size();
        if (!buckets_[b].fps.empty()) {
            buckets_[b].fps[0] ^= uint64_t(1) << (bit % fp_width(b));
            std::sort(buckets_[b].fps.begin(), buckets_[b].fps.end());
            return;
        }
    }
}

}  // namespace retrieval
