#include <algorithm>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "corec/harness.hpp"
#include "corec/txn_id.hpp"

namespace corec {

void ExperimentConfig::validate() const {
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!is_power_of_two(ring_size)) throw ConfigError("ring_size must be a power of two");
  if (batch_size == 0 || batch_size > ring_size) {
    throw ConfigError("batch_size must be in [1, ring_size]");
  }
  if (packet_budget == 0) throw ConfigError("packet_budget must be >= 1");
  if (flow_count == 0) throw ConfigError("flow_count must be >= 1");
  if (clock == ClockMode::kSimulated && arrival.rate_pps <= 0) {
    throw ConfigError("simulated clock requires a positive arrival rate");
  }
  if (clock == ClockMode::kSimulated && stall.has_value()) {
    // The event loop calls rx_batch synchronously; a mid-call pause cannot
    // be expressed in simulated time. Use wall clock or drive hooks directly.
    throw ConfigError("stall injection requires wall-clock mode");
  }
  if (stall && stall->thread_id >= threads) throw ConfigError("stall thread_id out of range");
  if (service_ns < 0 || service_ns_per_byte < 0) throw ConfigError("service cost must be >= 0");
  if (mode == Mode::kBaseline && stall.has_value()) {
    throw ConfigError("stall injection targets corec consumers only");
  }
}

namespace {

std::string seq_list(const std::vector<uint64_t>& seqs, size_t limit = 8) {
  std::ostringstream os;
  for (size_t i = 0; i < seqs.size() && i < limit; ++i) {
    if (i) os << ' ';
    os << seqs[i];
  }
  if (seqs.size() > limit) os << " ...(" << seqs.size() << " total)";
  return os.str();
}

}  // namespace

std::vector<InvariantCheck> validate_invariants(const RunResult& result) {
  std::vector<InvariantCheck> checks;

  // Exactly-once delivery: the delivered multiset must equal the installed
  // multiset (the run drains before shutdown, so nothing is in flight).
  {
    InvariantCheck c{"exactly_once_delivery", true, ""};
    std::vector<uint64_t> delivered;
    delivered.reserve(result.delivered_packets.size());
    for (const Packet& p : result.delivered_packets) delivered.push_back(p.seq);
    std::vector<uint64_t> installed = result.trace.installed_seqs;
    std::sort(delivered.begin(), delivered.end());
    std::sort(installed.begin(), installed.end());

    std::vector<uint64_t> dups;
    for (size_t i = 1; i < delivered.size(); ++i) {
      if (delivered[i] == delivered[i - 1]) dups.push_back(delivered[i]);
    }
    if (!dups.empty()) {
      c.pass = false;
      c.witness = "duplicate seqs: " + seq_list(dups);
    } else if (delivered != installed) {
      c.pass = false;
      std::vector<uint64_t> missing, phantom;
      std::set_difference(installed.begin(), installed.end(), delivered.begin(), delivered.end(),
                          std::back_inserter(missing));
      std::set_difference(delivered.begin(), delivered.end(), installed.begin(), installed.end(),
                          std::back_inserter(phantom));
      c.witness = "missing: [" + seq_list(missing) + "] phantom: [" + seq_list(phantom) + "]";
    }
    checks.push_back(std::move(c));
  }

  // Claim disjointness: winning claims, unwrapped from the initial ID, must
  // tile [initial, initial+delivered) with no gap or overlap.
  {
    InvariantCheck c{"claim_disjoint_contiguous_cover", true, ""};
    std::vector<std::pair<uint64_t, uint32_t>> claims;  // (unwrapped first, count)
    for (const auto& per_thread : result.trace.claims_by_thread) {
      for (const ClaimRecord& r : per_thread) {
        const uint32_t offset = r.first - result.trace.initial_id;  // mod 2^32
        claims.emplace_back(offset, r.count);
      }
    }
    if (claims.empty() && !result.trace.claims_by_thread.empty() && result.delivered > 0) {
      c.pass = false;
      c.witness = "packets delivered but no claims recorded";
    }
    std::sort(claims.begin(), claims.end());
    uint64_t expect = 0;
    for (const auto& [first, count] : claims) {
      if (first != expect) {
        c.pass = false;
        c.witness = "claim at offset " + std::to_string(first) + " but cover reaches " +
                    std::to_string(expect) + (first < expect ? " (overlap)" : " (gap)");
        break;
      }
      expect = first + count;
    }
    if (c.pass && !result.trace.claims_by_thread.empty() && expect != result.delivered) {
      c.pass = false;
      c.witness = "claims cover " + std::to_string(expect) + " ids, delivered " +
                  std::to_string(result.delivered);
    }
    checks.push_back(std::move(c));
  }

  // Tail accounting: every delivered descriptor went back through an accepted
  // contiguous tail write, and the checker saw no violation.
  {
    InvariantCheck c{"tail_release_accounting", true, ""};
    if (result.transparency_violations != 0) {
      c.pass = false;
      c.witness = std::to_string(result.transparency_violations) + " transparency violations";
    } else if (!result.trace.fully_released) {
      c.pass = false;
      c.witness = "rx_index != sw_tail at shutdown";
    } else if (result.trace.released_total != result.delivered) {
      c.pass = false;
      c.witness = "released " + std::to_string(result.trace.released_total) + ", delivered " +
                  std::to_string(result.delivered);
    }
    checks.push_back(std::move(c));
  }

  {
    InvariantCheck c{"read_done_quiescent", true, ""};
    if (!result.trace.read_done_quiescent) {
      c.pass = false;
      c.witness = "READ_DONE bits still set after drain";
    }
    checks.push_back(std::move(c));
  }

  return checks;
}

bool all_pass(std::span<const InvariantCheck> checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const InvariantCheck& c) { return c.pass; });
}

std::vector<CompareRow> compare(std::span<const ExperimentConfig> configs) {
  std::vector<CompareRow> rows;
  rows.reserve(configs.size());
  for (const ExperimentConfig& cfg : configs) {
    const RunResult r = run(cfg);
    CompareRow row;
    row.mode = cfg.mode == Mode::kCorec ? "corec" : "baseline";
    row.threads = cfg.threads;
    row.load = cfg.arrival.rate_pps;
    row.throughput = r.throughput_pps;
    row.mean = r.latency.mean;
    row.p99 = r.latency.p99;
    row.reorder_pct = r.reorder.percent * 100.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_compare_csv(std::ostream& os, std::span<const CompareRow> rows) {
  os << "mode,threads,load,throughput,mean,p99,reorder%\n";
  for (const CompareRow& r : rows) {
    os << r.mode << ',' << r.threads << ',' << r.load << ',' << r.throughput << ',' << r.mean
       << ',' << r.p99 << ',' << r.reorder_pct << '\n';
  }
}

}  // namespace corec
