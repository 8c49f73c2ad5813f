#include "corec/harness.hpp"

#include "json.hpp"

namespace corec {

namespace {

nlohmann::json reorder_json(const ReorderReport& r) {
  nlohmann::json flows = nlohmann::json::object();
  for (const auto& [flow, fr] : r.per_flow) {
    flows[std::to_string(flow)] = {{"received", fr.received}, {"reordered", fr.reordered}};
  }
  return {{"received", r.received},
          {"reordered", r.reordered},
          {"percent", r.percent},
          {"max_distance", r.max_distance},
          {"per_flow", std::move(flows)}};
}

}  // namespace

std::string run_result_json(const RunResult& result, std::span<const InvariantCheck> checks) {
  nlohmann::json j;
  j["throughput_pps"] = result.throughput_pps;
  j["elapsed_seconds"] = result.elapsed_seconds;
  j["offered"] = result.offered;
  j["installed"] = result.installed;
  j["delivered"] = result.delivered;
  j["dropped"] = result.dropped;
  j["transparency_violations"] = result.transparency_violations;
  j["per_queue_delivered"] = result.per_queue_delivered;
  if (!result.delivered_packets.empty()) {
    j["latency"] = {{"mean_ns", result.latency.mean},
                    {"p99_ns", result.latency.p99},
                    {"samples", result.latency.cdf.size()}};
  }
  j["reorder_per_flow"] = reorder_json(result.reorder);
  j["reorder_global"] = reorder_json(result.reorder_global);
  nlohmann::json inv = nlohmann::json::array();
  for (const InvariantCheck& c : checks) {
    inv.push_back({{"name", c.name}, {"pass", c.pass}, {"witness", c.witness}});
  }
  j["invariants"] = std::move(inv);
  return j.dump(2);
}

}  // namespace corec
