// Experiment runner for the corec library: receive-path runs (corec vs the
// single-consumer baseline), thread-count comparisons, queueing-model sweeps,
// and reordering studies. Emits CSV/JSON; exits nonzero when a run fails its
// invariants.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corec/harness.hpp"
#include "corec/metrics.hpp"
#include "corec/queueing.hpp"

namespace {

using namespace corec;

struct CliConfig {
  ExperimentConfig exp;
  std::string mode = "corec";
  std::string clock = "sim";
  std::string process = "poisson";
  std::string stall_point = "after-claim";
  unsigned stall_thread = 0;
  int64_t stall_ns = 0;
};

void add_experiment_flags(CLI::App* cmd, CliConfig& c) {
  cmd->add_option("--mode", c.mode, "corec | baseline")->check(CLI::IsMember({"corec", "baseline"}));
  cmd->add_option("--clock", c.clock, "sim | wall")->check(CLI::IsMember({"sim", "wall"}));
  cmd->add_option("--threads", c.exp.threads, "consumer threads / baseline queues");
  cmd->add_option("--ring-size", c.exp.ring_size, "descriptors per ring (power of two)");
  cmd->add_option("--batch-size", c.exp.batch_size, "max descriptors per rx call");
  cmd->add_option("--rate", c.exp.arrival.rate_pps, "arrival rate, packets/s (0 = unpaced, wall only)");
  cmd->add_option("--process", c.process, "poisson | constant | mixed")
      ->check(CLI::IsMember({"poisson", "constant", "mixed"}));
  cmd->add_option("--packets", c.exp.packet_budget, "packets offered to the NIC");
  cmd->add_option("--flows", c.exp.flow_count, "distinct flow ids");
  cmd->add_option("--packet-size", c.exp.packet_size, "bytes per packet (fixed-size processes)");
  cmd->add_option("--service-ns", c.exp.service_ns, "per-packet cost, simulated ns");
  cmd->add_option("--service-ns-per-byte", c.exp.service_ns_per_byte, "size-dependent cost, ns/byte");
  cmd->add_option("--service-spin", c.exp.service_spin, "per-packet spin iterations (wall)");
  cmd->add_option("--jitter-ns", c.exp.jitter_ns_max, "max random consumer sleep, wall ns");
  cmd->add_option("--stall-thread", c.stall_thread, "thread to stall (with --stall-ns)");
  cmd->add_option("--stall-point", c.stall_point, "after-claim | after-copy")
      ->check(CLI::IsMember({"after-claim", "after-copy"}));
  cmd->add_option("--stall-ns", c.stall_ns, "stall duration; 0 disables");
  cmd->add_option("--seed", c.exp.seed, "RNG seed");
  cmd->add_option("--output", c.exp.output_path, "write JSON result here");
}

void write_latency_cdf(const std::string& path, const LatencyReport& report) {
  std::ofstream out(path);
  out << "latency_ns,cumulative_fraction\n";
  const double n = static_cast<double>(report.cdf.size());
  for (size_t i = 0; i < report.cdf.size(); ++i) {
    out << report.cdf[i] << ',' << static_cast<double>(i + 1) / n << '\n';
  }
}

ExperimentConfig finalize(const CliConfig& c) {
  ExperimentConfig cfg = c.exp;
  cfg.mode = c.mode == "corec" ? Mode::kCorec : Mode::kBaseline;
  cfg.clock = c.clock == "sim" ? ClockMode::kSimulated : ClockMode::kWallClock;
  cfg.arrival.process = c.process == "poisson"    ? ArrivalProcess::kPoisson
                        : c.process == "constant" ? ArrivalProcess::kConstant
                                                  : ArrivalProcess::kMixedSizes;
  if (c.stall_ns > 0) {
    cfg.stall = StallSpec{c.stall_thread,
                          c.stall_point == "after-claim" ? StallPoint::kAfterClaim
                                                         : StallPoint::kAfterCopy,
                          c.stall_ns};
  }
  return cfg;
}

int do_run(const CliConfig& c, const std::string& cdf_path) {
  const ExperimentConfig cfg = finalize(c);
  const RunResult result = run(cfg);
  const std::vector<InvariantCheck> checks = validate_invariants(result);
  if (!cdf_path.empty() && !result.latency.cdf.empty()) {
    write_latency_cdf(cdf_path, result.latency);
  }

  std::cout << "installed=" << result.installed << " delivered=" << result.delivered
            << " dropped=" << result.dropped << " throughput=" << result.throughput_pps
            << " pps\n";
  if (result.delivered > 0) {
    std::cout << "latency mean=" << result.latency.mean << " ns p99=" << result.latency.p99
              << " ns\n";
  }
  std::cout << "reordered=" << result.reorder.reordered << " ("
            << result.reorder.percent * 100.0 << "%) max_distance=" << result.reorder.max_distance
            << "\n";
  for (const auto& chk : checks) {
    std::cout << (chk.pass ? "PASS " : "FAIL ") << chk.name
              << (chk.witness.empty() ? "" : ": " + chk.witness) << "\n";
  }
  if (!cfg.output_path.empty()) {
    std::ofstream out(cfg.output_path);
    out << run_result_json(result, checks) << "\n";
  }
  return all_pass(checks) ? 0 : 1;
}

int do_compare(const CliConfig& c, const std::vector<unsigned>& thread_counts,
               bool include_baseline, const std::string& csv_path) {
  std::vector<ExperimentConfig> configs;
  for (unsigned t : thread_counts) {
    CliConfig one = c;
    one.exp.threads = t;
    one.mode = "corec";
    configs.push_back(finalize(one));
  }
  if (include_baseline) {
    for (unsigned t : thread_counts) {
      CliConfig one = c;
      one.exp.threads = t;
      one.mode = "baseline";
      configs.push_back(finalize(one));
    }
  }
  const std::vector<CompareRow> rows = compare(configs);
  if (csv_path.empty()) {
    write_compare_csv(std::cout, rows);
  } else {
    std::ofstream out(csv_path);
    write_compare_csv(out, rows);
    std::cout << "wrote " << rows.size() << " rows to " << csv_path << "\n";
  }
  return 0;
}

int do_sweep(unsigned n_servers, const std::string& service, const std::vector<double>& loads,
             const std::vector<uint64_t>& seeds, uint64_t arrivals, const std::string& csv_path) {
  QueueModel base;
  base.n_servers = n_servers;
  base.service_rate = 1.0;
  base.service = service == "deterministic" ? ServiceModel::kDeterministic
                                            : ServiceModel::kMarkovian;
  const std::vector<SweepRow> rows = sweep(base, loads, seeds, arrivals);
  if (csv_path.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream out(csv_path);
    write_sweep_csv(out, rows);
    std::cout << "wrote " << rows.size() << " rows to " << csv_path << "\n";
  }
  return 0;
}

// Reordering study: fixed line rate in bytes/s, growing packet size (so
// growing per-packet cost via --service-ns-per-byte); reordered share should
// fall as sizes grow.
int do_reorder_test(const CliConfig& c, double line_rate_bps, const std::vector<uint32_t>& sizes,
                    const std::string& csv_path) {
  std::ostringstream csv;
  csv << "size_bytes,service_ns,rate_pps,received,reordered,percent,max_distance\n";
  for (uint32_t size : sizes) {
    CliConfig one = c;
    one.exp.packet_size = size;
    one.exp.arrival.rate_pps = line_rate_bps / static_cast<double>(size);
    ExperimentConfig cfg = finalize(one);
    const RunResult r = run(cfg);
    const int64_t cost = cfg.service_ns + static_cast<int64_t>(cfg.service_ns_per_byte * size);
    csv << size << ',' << cost << ',' << cfg.arrival.rate_pps << ',' << r.reorder.received << ','
        << r.reorder.reordered << ',' << r.reorder.percent * 100.0 << ','
        << r.reorder.max_distance << '\n';
  }
  if (csv_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(csv_path);
    out << csv.str();
    std::cout << "wrote " << csv_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corec experiment harness"};
  app.set_config("--config", "", "read options from an INI file");
  app.require_subcommand(1);

  CliConfig run_cfg;
  CLI::App* run_cmd = app.add_subcommand("run", "one experiment run");
  add_experiment_flags(run_cmd, run_cfg);

  CliConfig cmp_cfg;
  std::vector<unsigned> cmp_threads{1, 2, 4};
  bool cmp_baseline = false;
  std::string cmp_csv;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "same trace across thread counts");
  add_experiment_flags(cmp_cmd, cmp_cfg);
  cmp_cmd->add_option("--threads-list", cmp_threads, "thread counts to compare");
  cmp_cmd->add_flag("--with-baseline", cmp_baseline, "also run baseline rows");
  cmp_cmd->add_option("--csv", cmp_csv, "write the comparison table here");

  unsigned sweep_servers = 4;
  std::string sweep_service = "markovian";
  std::vector<double> sweep_loads{0.5, 0.7, 0.9};
  std::vector<uint64_t> sweep_seeds{1, 2, 3};
  uint64_t sweep_arrivals = 1000000;
  std::string sweep_csv;
  CLI::App* sweep_cmd = app.add_subcommand("queueing-sweep", "M/M/N vs NxM/M/1 latency sweep");
  sweep_cmd->add_option("--n-servers", sweep_servers, "servers (threads) in the model");
  sweep_cmd->add_option("--service", sweep_service, "markovian | deterministic")
      ->check(CLI::IsMember({"markovian", "deterministic"}));
  sweep_cmd->add_option("--loads", sweep_loads, "utilizations rho to sweep");
  sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per point");
  sweep_cmd->add_option("--arrivals", sweep_arrivals, "arrivals per run");
  sweep_cmd->add_option("--csv", sweep_csv, "output CSV path");

  CliConfig ro_cfg;
  double ro_line_rate = 600e6;
  std::vector<uint32_t> ro_sizes{64, 256, 1024};
  std::string ro_csv;
  CLI::App* ro_cmd = app.add_subcommand("reorder-test", "reordering vs packet size/cost");
  add_experiment_flags(ro_cmd, ro_cfg);
  ro_cmd->add_option("--line-rate-bps", ro_line_rate, "offered load in bytes/s");
  ro_cmd->add_option("--sizes", ro_sizes, "packet sizes to sweep");
  ro_cmd->add_option("--csv", ro_csv, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(run_cfg);
    if (cmp_cmd->parsed()) return do_compare(cmp_cfg, cmp_threads, cmp_baseline, cmp_csv);
    if (sweep_cmd->parsed()) {
      return do_sweep(sweep_servers, sweep_service, sweep_loads, sweep_seeds, sweep_arrivals,
                      sweep_csv);
    }
    if (ro_cmd->parsed()) return do_reorder_test(ro_cfg, ro_line_rate, ro_sizes, ro_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
