#include "retrieval/value_store.hpp"

#include <algorithm>
#include <cmath>

#include "retrieval/errors.hpp"

namespace retrieval {

namespace {

uint64_t words_for(uint64_t bits) { return (bits + 63) / 64; }

bool test_bit(const std::vector<uint64_t>& bm, uint64_t i) {
    return (bm[i >> 6] >> (i & 63)) & 1;
}

void set_bit(std::vector<uint64_t>& bm, uint64_t i) { bm[i >> 6] |= uint64_t(1) << (i & 63); }

void clear_bit(std::vector<uint64_t>& bm, uint64_t i) { bm[i >> 6] &= ~(uint64_t(1) << (i & 63)); }

}  // namespace

uint64_t ValueStore::slots_for(uint64_t capacity, uint64_t n_ref) {
    long double lg = log2l((long double)n_ref);
    long double m = (long double)capacity;
    uint64_t slots = (uint64_t)ceill(m * (1.0L + 1.0L / (lg * lg)) - 1e-9L);
    return slots <= capacity ? capacity + 1 : slots;
}

uint64_t ValueStore::block_bits(uint64_t n_ref, uint64_t slots) {
    long double poly = powl(log2l((long double)n_ref), 10.0L);
    if (poly >= (long double)slots) return slots;
    uint64_t c = (uint64_t)poly;
    return c < 1 ? 1 : c;
}

uint32_t ValueStore::index_fanout(uint64_t n_ref) {
    uint32_t f = (uint32_t)std::ceil(std::sqrt(std::log2((double)n_ref)));
    return f < 2 ? 2 : f;
}

std::vector<uint64_t> ValueStore::level_plan(uint64_t slots, uint64_t n_ref) {
    uint64_t block = block_bits(n_ref, slots);
    uint32_t fanout = index_fanout(n_ref);
    std::vector<uint64_t> widths;
    uint64_t width = (slots + block - 1) / block;
    while (true) {
        widths.push_back(width);
        if (width == 1) break;
        width = (width + fanout - 1) / fanout;
    }
    return widths;
}

ValueStore::ValueStore(uint64_t capacity, uint32_t value_bits, uint64_t n_ref, uint64_t hash_seed)
    : capacity_(capacity), value_bits_(value_bits) {
    if (capacity == 0) throw ConfigError("value store capacity must be positive");
    if (value_bits == 0 || value_bits > 64) throw ConfigError("value bits out of range");
    slots_ = slots_for(capacity, n_ref);
    block_bits_ = block_bits(n_ref, slots_);
    fanout_ = index_fanout(n_ref);
    hash_ = FiveWisePoly(hash_seed, slots_);
    values_.assign(words_for(slots_ * value_bits_), 0);
    occupancy_.assign(words_for(slots_), 0);

    uint64_t blocks = (slots_ + block_bits_ - 1) / block_bits_;
    free_in_block_.resize(blocks);
    for (uint64_t b = 0; b < blocks; ++b) {
        uint64_t lo = b * block_bits_;
        uint64_t hi = std::min(lo + block_bits_, slots_);
        free_in_block_[b] = hi - lo;
    }
    level_widths_ = level_plan(slots_, n_ref);
    for (uint64_t width : level_widths_) {
        index_.emplace_back(words_for(width), 0);
        // everything starts free, so every summary bit starts set
        auto& lv = index_.back();
        for (uint64_t i = 0; i < width; ++i) set_bit(lv, i);
    }
}

uint64_t ValueStore::get_slot(uint64_t slot) const {
    uint64_t pos = slot * value_bits_;
    uint64_t word = pos >> 6, off = pos & 63;
    uint64_t lo = values_[word] >> off;
    uint32_t got = 64 - (uint32_t)off;
    if (got < value_bits_) lo |= values_[word + 1] << got;
    return value_bits_ == 64 ? lo : lo & ((uint64_t(1) << value_bits_) - 1);
}

void ValueStore::set_slot(uint64_t slot, uint64_t value) {
    uint64_t mask = value_bits_ == 64 ? ~uint64_t(0) : (uint64_t(1) << value_bits_) - 1;
    value &= mask;
    uint64_t pos = slot * value_bits_;
    uint64_t word = pos >> 6, off = pos & 63;
    values_[word] = (values_[word] & ~(mask << off)) | (value << off);
    uint32_t got = 64 - (uint32_t)off;
    if (got < value_bits_) {
        uint64_t hi_mask = mask >> got;
        values_[word + 1] = (values_[word + 1] & ~hi_mask) | (value >> got);
    }
}

void ValueStore::mark_occupied(uint64_t slot) {
    set_bit(occupancy_, slot);
    uint64_t pos = slot / block_bits_;
    if (--free_in_block_[pos] > 0) return;
    // block just filled up: clear its summary bit and propagate
    for (size_t lv = 0; lv < index_.size(); ++lv) {
        clear_bit(index_[lv], pos);
        if (lv + 1 == index_.size()) break;
        uint64_t parent = pos / fanout_;
        uint64_t first = parent * fanout_;
        uint64_t last = std::min(first + fanout_, level_widths_[lv]);
        bool any = false;
        for (uint64_t i = first; i < last; ++i)
            if (test_bit(index_[lv], i)) {
                any = true;
                break;
            }
        if (any) return;
        pos = parent;
    }
}

uint64_t ValueStore::scan_block_from(uint64_t bit, uint64_t limit) const {
    // first clear occupancy bit in [bit, limit), or limit if none
    uint64_t w = bit >> 6;
    uint64_t inv = ~occupancy_[w] & (~uint64_t(0) << (bit & 63));
    while (true) {
        if (inv) {
            uint64_t cand = (w << 6) + (uint64_t)__builtin_ctzll(inv);
            return cand < limit ? cand : limit;
        }
        if (((++w) << 6) >= limit) return limit;
        inv = ~occupancy_[w];
    }
}

uint64_t ValueStore::first_empty_at_or_after(uint64_t s) const {
    if (count_ >= slots_) throw StoreFull("no free slots");
    uint64_t block = s / block_bits_;
    uint64_t block_end = std::min((block + 1) * block_bits_, slots_);
    if (test_bit(index_[0], block)) {
        uint64_t hit = scan_block_from(s, block_end);
        if (hit < block_end) return hit;
    }
    // ascend: look for the next summary bit set after our position
    uint64_t pos = block;
    for (size_t lv = 0; lv + 1 < index_.size(); ++lv) {
        uint64_t parent = pos / fanout_;
        uint64_t last = std::min((parent + 1) * fanout_, level_widths_[lv]);
        for (uint64_t i = pos + 1; i < last; ++i) {
            if (!test_bit(index_[lv], i)) continue;
            // descend to the leftmost free block under i
            uint64_t p = i;
            for (size_t down = lv; down > 0; --down) {
                uint64_t first = p * fanout_;
                uint64_t stop = std::min(first + fanout_, level_widths_[down - 1]);
                for (p = first; p < stop; ++p)
                    if (test_bit(index_[down - 1], p)) break;
            }
            uint64_t lo = p * block_bits_;
            return scan_block_from(lo, std::min(lo + block_bits_, slots_));
        }
        pos = parent;
    }
    // nothing after s: wrap to the globally first free block
    size_t top = index_.size() - 1;
    uint64_t p = 0;
    while (p < level_widths_[top] && !test_bit(index_[top], p)) ++p;
    for (size_t down = top; down > 0; --down) {
        uint64_t first = p * fanout_;
        uint64_t stop = std::min(first + fanout_, level_widths_[down - 1]);
        for (p = first; p < stop; ++p)
            if (test_bit(index_[down - 1], p)) break;
    }
    uint64_t lo = p * block_bits_;
    return scan_block_from(lo, std::min(lo + block_bits_, slots_));
}

uint64_t ValueStore::insert(uint64_t key, uint64_t value) {
    if (count_ >= capacity_) throw StoreFull("value store at capacity");
    uint64_t start = hash_(key);
    uint64_t slot = first_empty_at_or_after(start);
    set_slot(slot, value);
    mark_occupied(slot);
    ++count_;
    return slot >= start ? slot - start : slot + slots_ - start;
}

uint64_t ValueStore::index_bits() const {
    uint64_t total = 0;
    for (uint64_t w : level_widths_) total += w;
    return total;
}

void ValueStore::write_bits(BitWriter& w) const {
    for (uint64_t s = 0; s < slots_; ++s) w.put_bits(get_slot(s), value_bits_);
    for (uint64_t s = 0; s < slots_; ++s) w.put_bit(test_bit(occupancy_, s));
    for (size_t lv = 0; lv < index_.size(); ++lv)
        for (uint64_t i = 0; i < level_widths_[lv]; ++i) w.put_bit(test_bit(index_[lv], i));
}

void ValueStore::read_bits(BitReader& r) {
    for (auto& w : values_) w = 0;
    for (uint64_t s = 0; s < slots_; ++s) set_slot(s, r.get_bits(value_bits_));
    for (auto& w : occupancy_) w = 0;
    count_ = 0;
    for (uint64_t s = 0; s < slots_; ++s)
        if (r.get_bit()) {
            set_bit(occupancy_, s);
            ++count_;
        }
    for (auto& lv : index_)
        for (auto& w : lv) w = 0;
    for (size_t lv = 0; lv < index_.size(); ++lv)
        for (uint64_t i = 0; i < level_widths_[lv]; ++i)
            if (r.get_bit()) set_bit(index_[lv], i);
    if (index_ != rebuild_index()) throw SnapshotError("occupancy index inconsistent with bitmap");
    uint64_t blocks = level_widths_[0];
    for (uint64_t b = 0; b < blocks; ++b) {
        uint64_t lo = b * block_bits_;
        uint64_t hi = std::min(lo + block_bits_, slots_);
        uint64_t free = hi - lo;
        for (uint64_t s = lo; s < hi; ++s) free -= test_bit(occupancy_, s);
        free_in_block_[b] = free;
    }
}

void ValueStore::restore_hash(const std::array<uint64_t, 5>& coeff) {
    hash_ = FiveWisePoly::from_coefficients(coeff, slots_);
}

std::vector<std::vector<uint64_t>> ValueStore::rebuild_index() const {
    std::vector<std::vector<uint64_t>> out;
    uint64_t blocks = level_widths_[0];
    out.emplace_back(words_for(blocks), 0);
    for (uint64_t b = 0; b < blocks; ++b) {
        uint64_t lo = b * block_bits_;
        uint64_t hi = std::min(lo + block_bits_, slots_);
        for (uint64_t s = lo; s < hi; ++s)
            if (!test_bit(occupancy_, s)) {
                set_bit(out[0], b);
                break;
            }
    }
    for (size_t lv = 1; lv < level_widths_.size(); ++lv) {
        out.emplace_back(words_for(level_widths_[lv]), 0);
        for (uint64_t i = 0; i < level_widths_[lv]; ++i) {
            uint64_t first = i * fanout_;
            uint64_t stop = std::min(first + fanout_, level_widths_[lv - 1]);
            for (uint64_t c = first; c < stop; ++c)
                if (test_bit(out[lv - 1], c)) {
                    set_bit(out[lv], i);
                    break;
                }
        }
    }
    return out;
}

}  // namespace retrieval
