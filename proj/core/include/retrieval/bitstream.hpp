#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

#include "retrieval/bits.hpp"
#include "retrieval/errors.hpp"

namespace retrieval {

// LSB-first bit packing: bit i of the stream lives at bit (i % 8) of byte (i / 8).

class BitWriter {
  public:
    void put_bits(uint64_t value, uint32_t width) {
        assert(width <= 64);
        assert(width == 64 || (value >> width) == 0);
        for (uint32_t i = 0; i < width; ++i) put_bit((value >> i) & 1);
    }

    void put_bit(uint64_t bit) {
        size_t byte = nbits_ >> 3;
        if (byte == bytes_.size()) bytes_.push_back(0);
        bytes_[byte] |= static_cast<uint8_t>((bit & 1) << (nbits_ & 7));
        ++nbits_;
    }

    // Elias gamma code of x >= 1: b zeros, a one, then the b low bits of x,
    // where b = bit_width(x) - 1. Total length 2b + 1.
    void put_gamma(uint64_t x) {
        assert(x >= 1);
        uint32_t b = bits_for_count(x) - 1;
        put_bits(0, b);
        put_bit(1);
        if (b > 0) put_bits(x & ((uint64_t(1) << b) - 1), b);
    }

    // Pads with zero bits to the next byte boundary; returns the pad width.
    uint32_t align_byte() {
        uint32_t pad = static_cast<uint32_t>((8 - (nbits_ & 7)) & 7);
        put_bits(0, pad);
        return pad;
    }

    uint64_t bit_count() const { return nbits_; }
    const std::vector<uint8_t>& bytes() const { return bytes_; }

  private:
    std::vector<uint8_t> bytes_;
    uint64_t nbits_ = 0;
};

class BitReader {
  public:
    BitReader(const uint8_t* data, uint64_t nbits) : data_(data), nbits_(nbits) {}

    uint64_t get_bit() {
        if (pos_ >= nbits_) throw SnapshotError("bit stream exhausted");
        uint64_t bit = (data_[pos_ >> 3] >> (pos_ & 7)) & 1;
        ++pos_;
        return bit;
    }

    uint64_t get_bits(uint32_t width) {
        uint64_t v = 0;
        for (uint32_t i = 0; i < width; ++i) v |= get_bit() << i;
        return v;
    }

    uint64_t get_gamma() {
        uint32_t b = 0;
        while (get_bit() == 0) {
            if (++b > 63) throw SnapshotError("gamma code too long");
        }
        return (uint64_t(1) << b) | get_bits(b);
    }

    void align_byte() { pos_ = (pos_ + 7) & ~uint64_t(7); }

    void skip(uint64_t width) {
        if (width > nbits_ - pos_) throw SnapshotError("bit stream exhausted");
        pos_ += width;
    }

    uint64_t position() const { return pos_; }
    uint64_t remaining() const { return nbits_ - pos_; }

  private:
    const uint8_t* data_;
    uint64_t nbits_;
    uint64_t pos_ = 0;
};

// Code lengths, used by the space meter so that measured bits match emitted bits.
constexpr uint64_t gamma_bits(uint64_t x) {
    return 2 * (bits_for_count(x) - 1) + 1;
}

}  // namespace retrieval
