// Command line harness: verify, bench, build, query.
#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"

#include "retrieval/errors.hpp"
#include "retrieval/metering.hpp"
#include "retrieval/params.hpp"
#include "retrieval/snapshot.hpp"
#include "retrieval/table.hpp"
#include "retrieval/workload.hpp"

namespace {

uint64_t default_seed() {
  const char* s = std::getenv("RETRIEVAL_SEED");
  if (s == nullptr || *s == '\0') return 1;
  char* end = nullptr;
  uint64_t parsed = std::strtoull(s, &end, 0);
  if (end == s || *end != '\0') return 1;
  return parsed;
}

retrieval::RetrievalConfig base_config(uint64_t n, uint32_t v, uint64_t seed) {
  retrieval::RetrievalConfig cfg;
  cfg.n_max = n;
  cfg.value_bits = v;
  cfg.master_seed = seed;
  return cfg;
}

int cmd_verify(uint64_t n, uint32_t v, uint64_t seed, uint64_t ops, bool inject_fault) {
  retrieval::RetrievalConfig cfg = base_config(n, v, seed);
  retrieval::VerifyOutcome out =
      retrieval::run_verify(cfg, ops, /*check_reductions=*/true, inject_fault);
  if (!out.ok) {
    std::fprintf(stderr, "verify failed: %s\n", out.failure.c_str());
    return 1;
  }
  std::printf("verify ok: n=%" PRIu64 " v=%" PRIu32 " seed=%" PRIu64
              " checks=%" PRIu64 " advances=%" PRIu64 " diverted=%" PRIu64 "\n",
              n, v, seed, out.checks, out.advances, out.diverted);
  return 0;
}

struct BenchRow {
  uint64_t n = 0;
  uint32_t v = 0;
  uint64_t seed = 0;
  retrieval::SpaceReport report;
  double collision_frac = 0.0;
  double mean_log_offset = 0.0;
  double ms = 0.0;
};

BenchRow bench_one(uint64_t n, uint32_t v, uint64_t seed, bool timing) {
  retrieval::RetrievalConfig cfg = base_config(n, v, seed);
  retrieval::IncrementalRetrieval ir(cfg);
  std::vector<std::pair<uint64_t, uint64_t>> pairs = retrieval::make_pairs(
      n, ir.config().u_bits, v, retrieval::mix2(seed, 0x706169727331ull));
  auto start = std::chrono::steady_clock::now();
  for (const auto& kv : pairs) ir.insert(kv.first, kv.second);
  auto stop = std::chrono::steady_clock::now();

  BenchRow row;
  row.n = n;
  row.v = v;
  row.seed = seed;
  row.report = retrieval::measure(ir);
  row.collision_frac = double(ir.collisions().size()) / double(n);
  row.mean_log_offset = retrieval::mean_log_offset(ir);
  row.ms = timing
               ? std::chrono::duration<double, std::milli>(stop - start).count()
               : 0.0;
  return row;
}

void emit_schedule_line(std::FILE* fp, uint64_t n, uint32_t v) {
  retrieval::RetrievalConfig cfg = base_config(n, v, 1);
  cfg = cfg.normalized();
  retrieval::RoundSchedule sched = retrieval::derive_schedule(cfg);
  std::fprintf(fp, "# schedule n=%" PRIu64 " v=%" PRIu32 " ell=%" PRIu32
               " t0=%" PRIu32 " widths=",
               n, v, sched.ell, sched.initial_fp_bits);
  for (size_t i = 0; i < sched.fp_bits.size(); ++i)
    std::fprintf(fp, "%s%" PRIu32, i ? "," : "", sched.fp_bits[i]);
  std::fprintf(fp, " caps=");
  for (size_t i = 0; i < sched.capacities.size(); ++i)
    std::fprintf(fp, "%s%" PRIu64, i ? "," : "", sched.capacities[i]);
  std::fprintf(fp, "\n");
}

int cmd_bench(const std::vector<uint64_t>& n_list, const std::vector<uint32_t>& v_list,
              const std::vector<uint64_t>& seeds, const std::string& out_path,
              bool no_timing) {
  std::FILE* fp = stdout;
  if (!out_path.empty() && out_path != "-") {
    fp = std::fopen(out_path.c_str(), "w");
    if (fp == nullptr) {
      std::fprintf(stderr, "error: cannot open %s for writing\n", out_path.c_str());
      return 1;
    }
  }

  std::fprintf(fp, "%s\n", retrieval::kBenchCsvHeader);
  std::vector<retrieval::EnvelopePoint> points;
  for (uint64_t n : n_list) {
    for (uint32_t v : v_list) {
      emit_schedule_line(fp, n, v);
      double red_sum = 0.0;
      for (uint64_t seed : seeds) {
        BenchRow row = bench_one(n, v, seed, !no_timing);
        const retrieval::ComponentBits& c = row.report.components;
        std::fprintf(fp,
                     "%" PRIu64 ",%" PRIu32 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64
                     ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64
                     ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%.6f,%.6f,%.6f,%.3f\n",
                     row.n, row.v, row.seed, c.value_slots, c.occupancy_index,
                     c.directory_fps, c.directory_offsets,
                     c.directory_round_tags, c.reducer_indices, c.collision_store,
                     c.hash_descriptions, c.fixed_overhead, row.report.total_bits,
                     row.report.redundancy_per_key, row.collision_frac,
                     row.mean_log_offset, row.ms);
        red_sum += row.report.redundancy_per_key;
      }
      points.push_back({n, v, red_sum / double(seeds.size())});
    }
  }

  try {
    retrieval::Envelope env = retrieval::fit_envelope(points);
    std::fprintf(fp, "# envelope c1=%.6f c2=%.6f rms=%.6f points=%zu\n",
                 env.c1, env.c2, env.rms_residual, points.size());
  } catch (const std::exception& e) {
    std::fprintf(fp, "# envelope unavailable: %s\n", e.what());
  }

  if (fp != stdout) std::fclose(fp);
  return 0;
}

int cmd_build(const std::string& in_path, const std::string& out_path, uint64_t n,
              uint32_t v, uint64_t seed) {
  std::ifstream in(in_path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open %s\n", in_path.c_str());
    return 1;
  }

  std::vector<std::pair<uint64_t, uint64_t>> pairs;
  std::unordered_set<uint64_t> seen;
  std::string line;
  uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos) {
      std::fprintf(stderr, "parse error at line %" PRIu64 ": expected hex_key,hex_value\n",
                   line_no);
      return 2;
    }
    std::string key_text = line.substr(0, comma);
    std::string value_text = line.substr(comma + 1);
    char* end = nullptr;
    errno = 0;
    uint64_t key = std::strtoull(key_text.c_str(), &end, 16);
    if (end == key_text.c_str() || *end != '\0' || errno == ERANGE) {
      std::fprintf(stderr, "parse error at line %" PRIu64 ": bad key '%s'\n", line_no,
                   key_text.c_str());
      return 2;
    }
    errno = 0;
    uint64_t value = std::strtoull(value_text.c_str(), &end, 16);
    if (end == value_text.c_str() || *end != '\0' || errno == ERANGE) {
      std::fprintf(stderr, "parse error at line %" PRIu64 ": bad value '%s'\n", line_no,
                   value_text.c_str());
      return 2;
    }
    if (!seen.insert(key).second) {
      std::fprintf(stderr, "parse error at line %" PRIu64 ": duplicate key '%s'\n",
                   line_no, key_text.c_str());
      return 2;
    }
    pairs.emplace_back(key, value);
  }

  uint64_t n_max = n != 0 ? n : std::max<uint64_t>(pairs.size(), 2);
  if (pairs.size() > n_max) {
    std::fprintf(stderr, "error: %zu pairs exceed capacity %" PRIu64 "\n", pairs.size(),
                 n_max);
    return 2;
  }

  retrieval::RetrievalConfig cfg = base_config(n_max, v, seed);
  cfg = cfg.normalized();
  uint64_t key_limit = cfg.u_bits >= 64 ? ~uint64_t(0)
                                        : ((uint64_t(1) << cfg.u_bits) - 1);
  uint64_t value_limit =
      cfg.value_bits >= 64 ? ~uint64_t(0) : ((uint64_t(1) << cfg.value_bits) - 1);
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].first > key_limit) {
      std::fprintf(stderr, "error: key %zu exceeds %u-bit universe\n", i + 1,
                   cfg.u_bits);
      return 2;
    }
    if (pairs[i].second > value_limit) {
      std::fprintf(stderr, "error: value %zu exceeds %u bits\n", i + 1, cfg.value_bits);
      return 2;
    }
  }

  retrieval::IncrementalRetrieval ir(cfg);
  for (const auto& kv : pairs) ir.insert(kv.first, kv.second);
  retrieval::SnapshotBlob blob = retrieval::serialize_snapshot(ir);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::fprintf(stderr, "error: cannot open %s for writing\n", out_path.c_str());
    return 1;
  }
  out.write(reinterpret_cast<const char*>(blob.bytes.data()),
            std::streamsize(blob.bytes.size()));
  out.close();
  if (!out) {
    std::fprintf(stderr, "error: short write to %s\n", out_path.c_str());
    return 1;
  }
  std::printf("built: pairs=%zu bytes=%zu fixed_bits=%" PRIu64 "\n", pairs.size(),
              blob.bytes.size(), blob.tally.fixed_overhead);
  return 0;
}

int cmd_query(const std::string& snapshot_path, const std::string& key_text) {
  std::ifstream in(snapshot_path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "error: cannot open %s\n", snapshot_path.c_str());
    return 1;
  }
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  in.close();

  char* end = nullptr;
  errno = 0;
  uint64_t key = std::strtoull(key_text.c_str(), &end, 16);
  if (end == key_text.c_str() || *end != '\0' || errno == ERANGE) {
    std::fprintf(stderr, "error: bad key '%s'\n", key_text.c_str());
    return 2;
  }

  retrieval::IncrementalRetrieval ir = retrieval::deserialize_snapshot(bytes);
  std::printf("0x%" PRIx64 "\n", ir.query(key));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incremental retrieval harness"};
  app.require_subcommand(1);

  uint64_t n = 4096;
  uint32_t v = 8;
  uint64_t seed = default_seed();
  uint64_t ops = 0;
  bool inject_fault = false;
  CLI::App* verify = app.add_subcommand("verify", "build a table and check every invariant");
  verify->add_option("--n", n, "number of keys")->check(CLI::Range(uint64_t(2), uint64_t(1) << 26));
  verify->add_option("--v", v, "value bits")->check(CLI::Range(1u, 64u));
  verify->add_option("--seed", seed, "master seed");
  verify->add_option("--ops", ops, "interleaved update/query operations (0 means 2n)");
  verify->add_flag("--inject-fault", inject_fault)->group("");

  std::vector<uint64_t> n_list{1024, 4096};
  std::vector<uint32_t> v_list{8};
  std::vector<uint64_t> seeds{1};
  std::string out_path = "-";
  bool no_timing = false;
  CLI::App* bench = app.add_subcommand("bench", "measure space across a parameter grid");
  bench->add_option("--n-list", n_list, "key counts")->delimiter(',');
  bench->add_option("--v-list", v_list, "value bit widths")->delimiter(',');
  bench->add_option("--seeds", seeds, "master seeds")->delimiter(',');
  bench->add_option("--out", out_path, "output csv path (- for stdout)");
  bench->add_flag("--no-timing", no_timing, "zero the timing column for reproducible output");

  std::string in_path;
  std::string build_out = "snapshot.bin";
  uint64_t build_n = 0;
  uint32_t build_v = 8;
  uint64_t build_seed = default_seed();
  CLI::App* build = app.add_subcommand("build", "build a snapshot from a pairs file");
  build->add_option("--in", in_path, "input file, lines of hex_key,hex_value")->required();
  build->add_option("--out", build_out, "snapshot output path");
  build->add_option("--n", build_n, "capacity (0 means the pair count)");
  build->add_option("--v", build_v, "value bits")->check(CLI::Range(1u, 64u));
  build->add_option("--seed", build_seed, "master seed");

  std::string snapshot_path;
  std::string key_text;
  CLI::App* query = app.add_subcommand("query", "load a snapshot and answer one key");
  query->add_option("--snapshot", snapshot_path, "snapshot path")->required();
  query->add_option("--key", key_text, "key in hex")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (verify->parsed()) return cmd_verify(n, v, seed, ops, inject_fault);
    if (bench->parsed()) {
      if (n_list.empty() || v_list.empty() || seeds.empty()) {
        std::fprintf(stderr, "error: empty parameter list\n");
        return 2;
      }
      return cmd_bench(n_list, v_list, seeds, out_path, no_timing);
    }
    if (build->parsed()) return cmd_build(in_path, build_out, build_n, build_v, build_seed);
    if (query->parsed()) return cmd_query(snapshot_path, key_text);
  } catch (const retrieval::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
