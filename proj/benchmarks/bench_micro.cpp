#include <benchmark/benchmark.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "retrieval/hashing.hpp"
#include "retrieval/metering.hpp"
#include "retrieval/params.hpp"
#include "retrieval/snapshot.hpp"
#include "retrieval/table.hpp"
#include "retrieval/value_store.hpp"
#include "retrieval/workload.hpp"

namespace {

retrieval::RetrievalConfig config_for(uint64_t n, uint32_t v) {
  retrieval::RetrievalConfig cfg;
  cfg.n_max = n;
  cfg.value_bits = v;
  cfg.master_seed = 7;
  return cfg;
}

std::vector<std::pair<uint64_t, uint64_t>> pairs_for(const retrieval::RetrievalConfig& cfg) {
  retrieval::RetrievalConfig norm = cfg.normalized();
  return retrieval::make_pairs(norm.n_max, norm.u_bits, norm.value_bits, 99);
}

void bm_insert(benchmark::State& state) {
  const uint64_t n = uint64_t(state.range(0));
  retrieval::RetrievalConfig cfg = config_for(n, 8);
  auto pairs = pairs_for(cfg);
  for (auto _ : state) {
    retrieval::IncrementalRetrieval ir(cfg);
    for (const auto& kv : pairs) ir.insert(kv.first, kv.second);
    benchmark::DoNotOptimize(ir.inserted());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(n));
}
BENCHMARK(bm_insert)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

void bm_query(benchmark::State& state) {
  const uint64_t n = uint64_t(state.range(0));
  retrieval::RetrievalConfig cfg = config_for(n, 8);
  auto pairs = pairs_for(cfg);
  retrieval::IncrementalRetrieval ir(cfg);
  for (const auto& kv : pairs) ir.insert(kv.first, kv.second);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ir.query(pairs[i].first));
    i = (i + 1) % pairs.size();
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(bm_query)->Arg(1 << 12)->Arg(1 << 16);

void bm_update(benchmark::State& state) {
  const uint64_t n = uint64_t(state.range(0));
  retrieval::RetrievalConfig cfg = config_for(n, 8);
  auto pairs = pairs_for(cfg);
  retrieval::IncrementalRetrieval ir(cfg);
  for (const auto& kv : pairs) ir.insert(kv.first, kv.second);
  size_t i = 0;
  for (auto _ : state) {
    ir.update(pairs[i].first, (pairs[i].second + 1) & 0xff);
    i = (i + 1) % pairs.size();
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(bm_update)->Arg(1 << 16);

void bm_poly_eval(benchmark::State& state) {
  retrieval::FiveWisePoly poly(12345, uint64_t(1) << 20);
  uint64_t x = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(poly(x));
    ++x;
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(bm_poly_eval);

void bm_first_empty(benchmark::State& state) {
  const uint64_t m = uint64_t(1) << 16;
  retrieval::ValueStore store(m, 8, m, 42);
  uint64_t key = 0;
  for (uint64_t i = 0; i + 2 < m; ++i) store.insert(key++, i & 0xff);
  uint64_t probe = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(store.first_empty_at_or_after(probe));
    probe = (probe + 7919) % store.slots();
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(bm_first_empty);

void bm_serialize(benchmark::State& state) {
  const uint64_t n = uint64_t(1) << 16;
  retrieval::RetrievalConfig cfg = config_for(n, 8);
  auto pairs = pairs_for(cfg);
  retrieval::IncrementalRetrieval ir(cfg);
  for (const auto& kv : pairs) ir.insert(kv.first, kv.second);
  for (auto _ : state) {
    retrieval::SnapshotBlob blob = retrieval::serialize_snapshot(ir);
    benchmark::DoNotOptimize(blob.bytes.data());
  }
}
BENCHMARK(bm_serialize)->Unit(benchmark::kMillisecond);

void bm_deserialize(benchmark::State& state) {
  const uint64_t n = uint64_t(1) << 16;
  retrieval::RetrievalConfig cfg = config_for(n, 8);
  auto pairs = pairs_for(cfg);
  retrieval::IncrementalRetrieval ir(cfg);
  for (const auto& kv : pairs) ir.insert(kv.first, kv.second);
  retrieval::SnapshotBlob blob = retrieval::serialize_snapshot(ir);
  for (auto _ : state) {
    retrieval::IncrementalRetrieval copy = retrieval::deserialize_snapshot(blob.bytes);
    benchmark::DoNotOptimize(copy.inserted());
  }
}
BENCHMARK(bm_deserialize)->Unit(benchmark::kMillisecond);

void bm_measure(benchmark::State& state) {
  const uint64_t n = uint64_t(1) << 16;
  retrieval::RetrievalConfig cfg = config_for(n, 8);
  auto pairs = pairs_for(cfg);
  retrieval::IncrementalRetrieval ir(cfg);
  for (const auto& kv : pairs) ir.insert(kv.first, kv.second);
  for (auto _ : state) {
    retrieval::SpaceReport report = retrieval::measure(ir);
    benchmark::DoNotOptimize(report.total_bits);
  }
}
BENCHMARK(bm_measure);

}  // namespace

BENCHMARK_MAIN();
