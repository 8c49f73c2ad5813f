#include "corec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace corec {

namespace {

// Fenwick tree over seq ranks; counts how many of a flow's packets with
// seq <= r have arrived so far.
class RankCounter {
 public:
  explicit RankCounter(size_t n) : tree_(n + 1, 0) {}

  void add(size_t rank) {
    for (size_t i = rank + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i]++;
  }

  uint64_t count_le(size_t rank) const {
    uint64_t sum = 0;
    for (size_t i = rank + 1; i > 0; i -= i & (~i + 1)) sum += tree_[i];
    return sum;
  }

 private:
  std::vector<uint64_t> tree_;
};

struct FlowState {
  std::vector<uint64_t> seqs_in_arrival_order;
};

}  // namespace

ReorderReport reorder_analyze(std::span<const uint64_t> seqs, std::span<const uint32_t> flow_ids) {
  if (seqs.size() != flow_ids.size()) {
    throw std::invalid_argument("reorder_analyze: seq/flow length mismatch");
  }
  ReorderReport report;
  report.received = seqs.size();
  if (seqs.empty()) return report;

  // Collect per-flow arrival orders, then rank each flow's seqs so extents
  // reduce to order-statistic queries.
  std::unordered_map<uint32_t, FlowState> flows;
  for (size_t i = 0; i < seqs.size(); ++i) {
    flows[flow_ids[i]].seqs_in_arrival_order.push_back(seqs[i]);
  }

  for (auto& [flow, state] : flows) {
    const auto& arr = state.seqs_in_arrival_order;
    std::vector<uint64_t> sorted(arr);
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] == sorted[i - 1]) {
        throw DuplicateSeq("flow " + std::to_string(flow) + ": seq " +
                           std::to_string(sorted[i]) + " appears twice");
      }
    }

    RankCounter counter(sorted.size());
    uint64_t next_expected = 0;
    FlowReorder fr;
    fr.received = arr.size();
    for (size_t i = 0; i < arr.size(); ++i) {
      const uint64_t seq = arr[i];
      const size_t rank = static_cast<size_t>(
          std::lower_bound(sorted.begin(), sorted.end(), seq) - sorted.begin());
      if (seq < next_expected) {
        fr.reordered++;
        // Extent: earlier arrivals of this flow with a larger seq.
        const uint64_t earlier_le = counter.count_le(rank);
        const uint64_t extent = static_cast<uint64_t>(i) - earlier_le;
        report.max_distance = std::max(report.max_distance, extent);
      } else {
        next_expected = seq + 1;
      }
      counter.add(rank);
    }
    report.reordered += fr.reordered;
    report.per_flow.emplace(flow, fr);
  }

  report.percent = report.received == 0
                       ? 0.0
                       : static_cast<double>(report.reordered) / static_cast<double>(report.received);
  return report;
}

ReorderReport reorder_analyze_global(std::span<const uint64_t> seqs) {
  std::vector<uint32_t> one_flow(seqs.size(), 0);
  return reorder_analyze(seqs, one_flow);
}

LatencyReport latency_analyze(std::span<const Packet> packets) {
  if (packets.empty()) throw EmptyInput("latency_analyze: no packets");
  LatencyReport report;
  report.cdf.reserve(packets.size());
  double sum = 0;
  for (const Packet& p : packets) {
    if (!p.delivered()) {
      throw MissingTimestamp("latency_analyze: seq " + std::to_string(p.seq) +
                             " has no delivery timestamp");
    }
    const int64_t d = p.t_deliver - p.t_inject;
    report.cdf.push_back(d);
    sum += static_cast<double>(d);
  }
  std::sort(report.cdf.begin(), report.cdf.end());
  report.mean = sum / static_cast<double>(report.cdf.size());
  report.p99 = static_cast<double>(latency_quantile(report, 0.99));
  return report;
}

int64_t latency_quantile(const LatencyReport& report, double q) {
  if (report.cdf.empty()) throw EmptyInput("latency_quantile: empty report");
  const size_t rank =
      static_cast<size_t>(std::ceil(q * static_cast<double>(report.cdf.size())));
  return report.cdf[std::max<size_t>(rank, 1) - 1];
}

}  // namespace corec
