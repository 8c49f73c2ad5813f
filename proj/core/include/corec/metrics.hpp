#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "corec/errors.hpp"
#include "corec/packet.hpp"

namespace corec {

struct FlowReorder {
  uint64_t received = 0;
  uint64_t reordered = 0;
};

struct ReorderReport {
  uint64_t received = 0;
  uint64_t reordered = 0;
  double percent = 0;         // reordered / received (0 when empty)
  uint64_t max_distance = 0;  // largest reordering extent observed
  std::map<uint32_t, FlowReorder> per_flow;
};

// Per-flow reordering analysis over an arrival sequence. A packet counts as
// reordered iff its seq is below the flow's running next-expected value
// (max seq seen + 1); its extent is the number of earlier arrivals of the
// same flow carrying a larger seq. Throws DuplicateSeq if a seq repeats
// within a flow.
ReorderReport reorder_analyze(std::span<const uint64_t> seqs, std::span<const uint32_t> flow_ids);

// Same analysis ignoring flows (the whole sequence as one stream).
ReorderReport reorder_analyze_global(std::span<const uint64_t> seqs);

struct LatencyReport {
  double mean = 0;
  double p99 = 0;
  std::vector<int64_t> cdf;  // sorted (t_deliver - t_inject) samples, ns
};

// Exact latency aggregation over delivered packets. Throws EmptyInput on an
// empty set and MissingTimestamp if any packet lacks t_deliver.
LatencyReport latency_analyze(std::span<const Packet> packets);

// Nearest-rank quantile over the report's sorted samples, q in (0, 1].
int64_t latency_quantile(const LatencyReport& report, double q);

}  // namespace corec
