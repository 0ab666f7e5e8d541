#include "retrieval/hashing.hpp"

#include "retrieval/errors.hpp"

namespace retrieval {

uint64_t bucket_of(uint64_t key, const RetrievalConfig& cfg) {
    if (cfg.u_bits < 64 && (key >> cfg.u_bits) != 0)
        throw RangeError("bucket_of: key outside universe");
    uint64_t seed = derive_seed(cfg.master_seed, SeedStream::Bucket);
    return map_to_range(mix2(seed, key), cfg.bucket_count());
}

uint64_t initial_fingerprint(uint64_t key, const RetrievalConfig& cfg, uint32_t t0) {
    if (cfg.u_bits < 64 && (key >> cfg.u_bits) != 0)
        throw RangeError("initial_fingerprint: key outside universe");
    uint64_t seed = derive_seed(cfg.master_seed, SeedStream::InitialFp);
    uint64_t range = static_cast<uint64_t>(cfg.bucket_size) << t0;
    return map_to_range(mix2(seed, key), range);
}

namespace {

constexpr uint64_t kP = FiveWisePoly::kPrime;

uint64_t mod_p(unsigned __int128 x) {
    // 2^61 == 1 (mod p) folds the product in two steps.
    uint64_t lo = static_cast<uint64_t>(x & kP);
    uint64_t mid = static_cast<uint64_t>((x >> 61) & kP);
    uint64_t hi = static_cast<uint64_t>(x >> 122);
    uint64_t r = lo + mid + hi;
    while (r >= kP) r -= kP;
    return r;
}

}  // namespace

FiveWisePoly::FiveWisePoly(uint64_t seed, uint64_t range) : range_(range) {
    uint64_t s = seed;
    for (auto& c : coeff_) {
        s = mix64(s + 0x71c9);
        c = s % kP;
    }
}

FiveWisePoly FiveWisePoly::from_coefficients(const std::array<uint64_t, 5>& coeff, uint64_t range) {
    FiveWisePoly h;
    h.coeff_ = coeff;
    h.range_ = range;
    return h;
}

uint64_t FiveWisePoly::operator()(uint64_t key) const {
    uint64_t x = mod_p(key);
    uint64_t acc = coeff_[4];
    for (int i = 3; i >= 0; --i) acc = mod_p(static_cast<unsigned __int128>(acc) * x + coeff_[i]);
    // Fold the 61-bit field element onto [range].
    return static_cast<uint64_t>((static_cast<unsigned __int128>(acc) * range_) >> 61);
}

}  // namespace retrieval
