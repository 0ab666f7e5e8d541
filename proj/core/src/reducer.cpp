#include "retrieval/reducer.hpp"

#include <algorithm>
#include <cassert>

#include "retrieval/errors.hpp"

namespace retrieval {

uint64_t apply_reduction(uint64_t fp, const ReducerEntry& entry, uint32_t bucket_size) {
    uint64_t from_range = static_cast<uint64_t>(bucket_size) << entry.from_bits;
    if (fp >= from_range) throw RangeError("apply_reduction: fingerprint outside source range");
    if (entry.identity()) return fp;
    uint64_t to_range = static_cast<uint64_t>(bucket_size) << entry.to_bits;
    return map_to_range(mix2(entry.trial_seed, fp), to_range);
}

uint64_t compose_reduce(uint64_t initial_fp, std::span<const ReducerEntry> chain,
                        uint32_t upto_round, uint32_t bucket_size) {
    if (upto_round >= 2 && chain.size() + 1 < upto_round)
        throw ChainError("compose_reduce: chain shorter than requested round");
    uint64_t fp = initial_fp;
    for (const auto& entry : chain) {
        if (entry.round > upto_round) break;
        fp = apply_reduction(fp, entry, bucket_size);
    }
    return fp;
}

std::optional<ReducerEntry> find_perfect_reduction(std::span<const uint64_t> fps,
                                                   uint32_t from_bits, uint32_t to_bits,
                                                   uint64_t stream_seed, uint32_t round,
                                                   uint64_t bucket, uint32_t bucket_size,
                                                   uint64_t budget) {
    ReducerEntry entry;
    entry.round = round;
    entry.bucket = bucket;
    entry.from_bits = from_bits;
    entry.to_bits = to_bits;

    if (entry.identity() || fps.size() <= 1) {
        entry.seed_index = 0;
        entry.trial_seed = reducer_trial_seed(stream_seed, round, bucket, 0);
        return entry;
    }

    uint64_t to_range = static_cast<uint64_t>(bucket_size) << to_bits;
    assert(fps.size() <= to_range);
    std::vector<uint64_t> images(fps.size());

    for (uint64_t trial = 0; trial < budget; ++trial) {
        uint64_t seed = reducer_trial_seed(stream_seed, round, bucket, trial);
        bool injective = true;
        for (size_t i = 0; i < fps.size(); ++i)
            images[i] = map_to_range(mix2(seed, fps[i]), to_range);
        std::sort(images.begin(), images.end());
        for (size_t i = 1; i < images.size(); ++i) {
            if (images[i] == images[i - 1]) {
                injective = false;
                break;
            }
        }
        if (injective) {
            entry.seed_index = trial;
            entry.trial_seed = seed;
            return entry;
        }
    }
    return std::nullopt;
}

}  // namespace retrieval
