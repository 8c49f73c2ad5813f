#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corec/errors.hpp"
#include "corec/metrics.hpp"
#include "corec/packet.hpp"
#include "corec/rx_queue.hpp"

namespace corec {

enum class Mode { kCorec, kBaseline };

// kSimulated: one OS thread drives NIC and consumers through an event loop in
// simulated nanoseconds — fully deterministic, used for latency/throughput
// curves. kWallClock: real threads, steady_clock timestamps — used for
// concurrency stress.
enum class ClockMode { kSimulated, kWallClock };

enum class ArrivalProcess { kPoisson, kConstant, kMixedSizes };

// The two claim-outstanding windows where a consumer can be paused.
enum class StallPoint { kAfterClaim, kAfterCopy };

struct ArrivalSpec {
  // Packets per second. 0 means unpaced: the NIC offers as fast as the ring
  // accepts (wall-clock mode only).
  double rate_pps = 0;
  ArrivalProcess process = ArrivalProcess::kPoisson;
};

struct StallSpec {
  unsigned thread_id = 0;
  StallPoint point = StallPoint::kAfterClaim;
  int64_t duration_ns = 0;  // cooperative sleep at the trigger, first hit only
};

struct ExperimentConfig {
  Mode mode = Mode::kCorec;
  ClockMode clock = ClockMode::kSimulated;
  unsigned threads = 4;  // consumers (corec) or queues==consumers (baseline)
  uint32_t ring_size = 1024;
  uint32_t batch_size = 32;
  ArrivalSpec arrival;
  uint64_t packet_budget = 100000;  // packets offered to the NIC
  uint32_t flow_count = 256;
  uint32_t packet_size = 64;        // fixed size unless kMixedSizes

  // Per-packet application cost: simulated runs charge
  // service_ns + service_ns_per_byte * size; wall-clock runs spin
  // service_spin iterations.
  int64_t service_ns = 1000;
  double service_ns_per_byte = 0;
  uint64_t service_spin = 0;

  // Wall-clock consumers sleep up to this long at random points to shake
  // out interleavings. 0 disables.
  int64_t jitter_ns_max = 0;

  std::optional<StallSpec> stall;
  uint64_t seed = 1;
  bool record_claims = true;
  int64_t poll_interval_ns = 200;  // simulated idle re-poll spacing
  std::string output_path;

  void validate() const;  // throws ConfigError
};

struct ClaimRecord {
  TxnId first;
  uint32_t count;
};

struct RunTrace {
  TxnId initial_id = 0;
  std::vector<std::vector<ClaimRecord>> claims_by_thread;
  std::vector<uint64_t> installed_seqs;
  bool read_done_quiescent = true;
  bool fully_released = true;
  uint64_t released_total = 0;
};

struct RunResult {
  double throughput_pps = 0;
  double elapsed_seconds = 0;  // wall or simulated
  LatencyReport latency;
  ReorderReport reorder;  // per-flow analysis (primary)
  ReorderReport reorder_global;
  uint64_t offered = 0;
  uint64_t installed = 0;
  uint64_t delivered = 0;
  uint64_t dropped = 0;
  uint64_t transparency_violations = 0;
  std::vector<uint64_t> per_queue_delivered;
  std::vector<Packet> delivered_packets;  // delivery order
  RunTrace trace;
};

// Builds the topology for `config`, drives the NIC emulator and consumers to
// the packet budget, drains, and aggregates the reports.
RunResult run(const ExperimentConfig& config);

struct CompareRow {
  std::string mode;
  unsigned threads = 0;
  double load = 0;
  double throughput = 0;
  double mean = 0;
  double p99 = 0;
  double reorder_pct = 0;
};

std::vector<CompareRow> compare(std::span<const ExperimentConfig> configs);

// CSV: mode,threads,load,throughput,mean,p99,reorder%
void write_compare_csv(std::ostream& os, std::span<const CompareRow> rows);

struct InvariantCheck {
  std::string name;
  bool pass = false;
  std::string witness;  // failure detail, empty on pass
};

// Post-run checks: exactly-once delivery, claim disjointness and contiguous
// cover, tail/release accounting, read_done quiescence, zero transparency
// violations.
std::vector<InvariantCheck> validate_invariants(const RunResult& result);
bool all_pass(std::span<const InvariantCheck> checks);

std::string run_result_json(const RunResult& result, std::span<const InvariantCheck> checks);

}  // namespace corec
