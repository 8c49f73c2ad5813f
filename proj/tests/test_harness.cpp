#include <sstream>

#include "corec/harness.hpp"
#include "doctest.h"

using namespace corec;

namespace {

ExperimentConfig sim_corec(unsigned threads, uint64_t packets, double rate, uint64_t seed = 1) {
  ExperimentConfig cfg;
  cfg.mode = Mode::kCorec;
  cfg.clock = ClockMode::kSimulated;
  cfg.threads = threads;
  cfg.arrival.rate_pps = rate;
  cfg.packet_budget = packets;
  cfg.service_ns = 400;
  cfg.seed = seed;
  return cfg;
}

std::vector<uint64_t> delivered_seqs(const RunResult& r) {
  std::vector<uint64_t> seqs;
  seqs.reserve(r.delivered_packets.size());
  for (const Packet& p : r.delivered_packets) seqs.push_back(p.seq);
  return seqs;
}

}  // namespace

TEST_CASE("config validation rejects malformed experiments") {
  ExperimentConfig cfg = sim_corec(4, 1000, 1e6);
  cfg.ring_size = 100;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = sim_corec(0, 1000, 1e6);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = sim_corec(4, 1000, 0);  // simulated clock needs a rate
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = sim_corec(4, 1000, 1e6);
  cfg.stall = StallSpec{0, StallPoint::kAfterClaim, 1000};  // not in sim mode
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = sim_corec(4, 1000, 1e6);
  cfg.batch_size = 4096;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("corec with one thread replays the baseline exactly") {
  ExperimentConfig corec = sim_corec(1, 20000, 2e6, 77);
  ExperimentConfig base = corec;
  base.mode = Mode::kBaseline;
  const RunResult a = run(corec);
  const RunResult b = run(base);
  CHECK(a.delivered == 20000);
  CHECK(delivered_seqs(a) == delivered_seqs(b));
  CHECK(a.reorder.reordered == 0);
  CHECK(b.reorder.reordered == 0);
}

TEST_CASE("simulated runs are reproducible per seed") {
  const RunResult a = run(sim_corec(4, 20000, 3e6, 5));
  const RunResult b = run(sim_corec(4, 20000, 3e6, 5));
  CHECK(a.delivered == b.delivered);
  CHECK(a.latency.mean == b.latency.mean);
  CHECK(a.reorder.reordered == b.reorder.reordered);
  CHECK(delivered_seqs(a) == delivered_seqs(b));
}

TEST_CASE("baseline spreads uniform flows evenly over queues") {
  ExperimentConfig cfg = sim_corec(4, 40000, 3e6, 13);
  cfg.mode = Mode::kBaseline;
  cfg.flow_count = 4096;
  const RunResult r = run(cfg);
  REQUIRE(r.per_queue_delivered.size() == 4);
  const double expected = 40000.0 / 4.0;
  for (uint64_t c : r.per_queue_delivered) {
    CHECK(static_cast<double>(c) > expected * 0.95);
    CHECK(static_cast<double>(c) < expected * 1.05);
  }
}

TEST_CASE("an honest run passes every invariant") {
  const RunResult r = run(sim_corec(4, 50000, 3e6));
  const auto checks = validate_invariants(r);
  REQUIRE(checks.size() == 4);
  for (const auto& c : checks) {
    INFO(c.name, ": ", c.witness);
    CHECK(c.pass);
  }
  CHECK(all_pass(checks));
}

TEST_CASE("validate_invariants reports a witness for a corrupted trace") {
  RunResult r = run(sim_corec(2, 5000, 2e6));
  // Tamper: drop one delivered packet and duplicate another.
  REQUIRE(r.delivered_packets.size() > 10);
  r.delivered_packets[3] = r.delivered_packets[7];
  auto checks = validate_invariants(r);
  CHECK_FALSE(all_pass(checks));
  bool found = false;
  for (const auto& c : checks) {
    if (c.name == "exactly_once_delivery" && !c.pass) {
      found = true;
      CHECK(c.witness.find("duplicate") != std::string::npos);
    }
  }
  CHECK(found);

  // A gapped claim trace is caught with an explicit witness.
  RunResult r2 = run(sim_corec(2, 5000, 2e6));
  REQUIRE((!r2.trace.claims_by_thread[0].empty() || !r2.trace.claims_by_thread[1].empty()));
  auto& claims =
      r2.trace.claims_by_thread[r2.trace.claims_by_thread[0].empty() ? 1 : 0];
  claims.front().count += 1;  // overlap into the next claim
  checks = validate_invariants(r2);
  CHECK_FALSE(all_pass(checks));
}

TEST_CASE("wall-clock stress with jitter keeps exactly-once") {
  ExperimentConfig cfg;
  cfg.mode = Mode::kCorec;
  cfg.clock = ClockMode::kWallClock;
  cfg.threads = 4;
  cfg.arrival.rate_pps = 0;  // unpaced
  cfg.packet_budget = 100000;
  cfg.jitter_ns_max = 10000;
  cfg.seed = 3;
  const RunResult r = run(cfg);
  CHECK(r.installed == 100000);
  CHECK(r.delivered == 100000);
  CHECK(r.transparency_violations == 0);
  CHECK(all_pass(validate_invariants(r)));
}

TEST_CASE("wall-clock stall delays but does not lose packets") {
  ExperimentConfig cfg;
  cfg.mode = Mode::kCorec;
  cfg.clock = ClockMode::kWallClock;
  cfg.threads = 2;
  cfg.arrival.rate_pps = 0;
  cfg.packet_budget = 20000;
  cfg.stall = StallSpec{0, StallPoint::kAfterCopy, 20000000};  // 20 ms
  cfg.seed = 4;
  const RunResult r = run(cfg);
  CHECK(r.delivered == r.installed);
  CHECK(r.transparency_violations == 0);
  CHECK(all_pass(validate_invariants(r)));
}

TEST_CASE("mixed-size traffic crosses the rx path intact") {
  ExperimentConfig cfg = sim_corec(4, 30000, 2e6, 21);
  cfg.arrival.process = ArrivalProcess::kMixedSizes;
  cfg.service_ns = 100;
  cfg.service_ns_per_byte = 0.5;
  const RunResult r = run(cfg);
  CHECK(r.delivered == 30000);
  CHECK(all_pass(validate_invariants(r)));
  bool saw_small = false;
  bool saw_large = false;
  for (const Packet& p : r.delivered_packets) {
    saw_small = saw_small || p.size_bytes == 64;
    saw_large = saw_large || p.size_bytes >= 1024;
  }
  CHECK(saw_small);
  CHECK(saw_large);
}

TEST_CASE("compare emits one row per config with the documented header") {
  std::vector<ExperimentConfig> configs{sim_corec(1, 5000, 2e6), sim_corec(2, 5000, 2e6)};
  const auto rows = compare(configs);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].threads == 1);
  CHECK(rows[1].threads == 2);
  std::ostringstream os;
  write_compare_csv(os, rows);
  CHECK(os.str().rfind("mode,threads,load,throughput,mean,p99,reorder%\n", 0) == 0);

  const auto again = compare(configs);
  CHECK(again[0].throughput == rows[0].throughput);  // shared seeds, same table
  CHECK(again[1].p99 == rows[1].p99);
}

TEST_CASE("paced overload drops at the NIC and still balances the books") {
  ExperimentConfig cfg = sim_corec(1, 30000, 4e6, 8);
  cfg.service_ns = 1000;  // 4x oversubscribed on one consumer
  const RunResult r = run(cfg);
  CHECK(r.dropped > 0);
  CHECK(r.installed + r.dropped == r.offered);
  CHECK(r.delivered == r.installed);
  CHECK(all_pass(validate_invariants(r)));
}
