#include "retrieval/reference.hpp"

#include "retrieval/errors.hpp"
#include "retrieval/hashing.hpp"

namespace retrieval {

namespace {

// Remaps one global round: collect every resident fingerprint, find one
// injective reduction for all of them, rebuild every table under it.
// False = trial budget exhausted, caller restarts with a fresh master.
bool alg1_apply_round(Algorithm1State& st, uint64_t seed_reducer, uint32_t round) {
    uint32_t from = st.schedule.width_of_round(round - 1);
    uint32_t to = st.schedule.width_of_round(round);
    std::vector<uint64_t> fps;
    for (const auto& table : st.tables)
        for (const auto& [fp, value] : table) fps.push_back(fp);
    auto found = find_perfect_reduction(fps, from, to, seed_reducer, round, 0,
                                        st.cfg.bucket_size, st.cfg.search_budget);
    if (!found) return false;
    for (auto& table : st.tables) {
        std::unordered_map<uint64_t, uint64_t> remapped;
        remapped.reserve(table.size());
        for (const auto& [fp, value] : table)
            remapped.emplace(apply_reduction(fp, *found, st.cfg.bucket_size), value);
        table = std::move(remapped);
    }
    st.chain.push_back(*found);
    return true;
}

bool alg1_attempt(Algorithm1State& st,
                  const std::vector<std::pair<uint64_t, uint64_t>>& stream) {
    const RetrievalConfig& cfg = st.cfg;
    uint64_t seed_reducer = derive_seed(cfg.master_seed, SeedStream::Reducer);
    st.schedule = derive_schedule(cfg);
    st.plan = make_plan(st.schedule);

    for (uint32_t r = 2; r <= st.plan.stages[0].round; ++r)
        if (!alg1_apply_round(st, seed_reducer, r)) return false;
    st.tables.emplace_back();

    for (const auto& [key, value] : stream) {
        if (st.inserted >= cfg.n_max) throw CapacityExceeded("stream longer than n_max");
        while (st.stage + 1 < st.plan.stages.size() &&
               st.inserted == st.plan.stages[st.stage].boundary) {
            uint32_t prev = st.plan.stages[st.stage].round;
            uint32_t next = st.plan.stages[st.stage + 1].round;
            for (uint32_t r = prev + 1; r <= next; ++r)
                if (!alg1_apply_round(st, seed_reducer, r)) return false;
            st.tables.emplace_back();
            ++st.stage;
        }
        uint64_t fp = initial_fingerprint(key, cfg, st.plan.initial_width);
        fp = compose_reduce(fp, st.chain, (uint32_t)st.chain.size() + 1, cfg.bucket_size);
        bool resident = false;
        for (const auto& table : st.tables)
            if (table.count(fp)) {
                resident = true;
                break;
            }
        if (resident)
            st.collisions.emplace(key, value);
        else
            st.tables[st.stage].emplace(fp, value);
        ++st.inserted;
    }
    return true;
}

}  // namespace

Algorithm1State alg1_build(const RetrievalConfig& cfg,
                           const std::vector<std::pair<uint64_t, uint64_t>>& stream,
                           uint32_t max_retries) {
    RetrievalConfig base = cfg.normalized();
    for (uint32_t attempt = 0; attempt < max_retries; ++attempt) {
        Algorithm1State st;
        st.cfg = base;
        if (attempt > 0) st.cfg.master_seed = mix2(base.master_seed, attempt);
        st.retries_used = attempt;
        if (alg1_attempt(st, stream)) return st;
    }
    throw SearchExhausted("global reduction failed on every retry");
}

uint64_t alg1_query(const Algorithm1State& st, uint64_t key) {
    auto hit = st.collisions.find(key);
    if (hit != st.collisions.end()) return hit->second;
    uint64_t fp = initial_fingerprint(key, st.cfg, st.plan.initial_width);
    fp = compose_reduce(fp, st.chain, (uint32_t)st.chain.size() + 1, st.cfg.bucket_size);
    for (const auto& table : st.tables) {
        auto it = table.find(fp);
        if (it != table.end()) return it->second;
    }
    return 0;
}

}  // namespace retrieval
