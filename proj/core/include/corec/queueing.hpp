#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "corec/errors.hpp"

namespace corec {

// kSharedQueue: one FIFO feeding N servers (M/M/N — the scale-up shape).
// kPerServerQueue: N independent FIFOs, one server each, arrivals split
// uniformly at random (NxM/M/1 — the scale-out shape).
enum class Topology { kSharedQueue, kPerServerQueue };

enum class ServiceModel { kMarkovian, kDeterministic };

struct QueueModel {
  Topology topology = Topology::kSharedQueue;
  double arrival_rate = 1.0;  // lambda, events per unit time (system-wide)
  double service_rate = 1.0;  // mu, per server
  ServiceModel service = ServiceModel::kMarkovian;
  unsigned n_servers = 1;

  double utilization() const { return arrival_rate / (n_servers * service_rate); }
};

struct SojournStats {
  uint64_t count = 0;  // samples kept after warm-up
  double mean = 0;
  double p50 = 0;
  double p99 = 0;
  double max = 0;
  // Time-average number in system over the whole run, integrated from the
  // event bookkeeping (independent of the per-sample sums; Little's law ties
  // the two together).
  double time_avg_in_system = 0;
};

// Event-driven FIFO simulation of `model` over n_arrivals, deterministic for
// a given seed. The first warmup_fraction of arrivals is measured into
// time_avg_in_system but excluded from the sojourn samples. Quantiles are
// nearest-rank on the exact sorted samples. Throws InvalidRate on
// non-positive rates; warns on stderr when rho >= 1.
SojournStats simulate(const QueueModel& model, uint64_t n_arrivals, uint64_t seed,
                      double warmup_fraction = 0.10);

struct ErlangResult {
  double wait;     // expected time in queue
  double sojourn;  // wait + 1/mu
  double p_wait;   // Erlang-C probability an arrival waits
};

// Closed-form M/M/N expected wait (Erlang-C). Throws Unstable when rho >= 1,
// InvalidRate on non-positive inputs.
ErlangResult erlang_c(double lambda, double mu, unsigned n_servers);

struct SweepRow {
  double load;  // rho
  Topology topology;
  unsigned n_servers;
  ServiceModel service;
  double mean, p50, p99, max;
  uint64_t seed;
};

// Runs simulate() for every (load, topology, seed) combination of the grid,
// holding service model and server count from the template.
std::vector<SweepRow> sweep(const QueueModel& base, const std::vector<double>& loads,
                            const std::vector<uint64_t>& seeds, uint64_t n_arrivals);

std::string topology_name(Topology t);
std::string service_name(ServiceModel s);

// CSV: load,topology,n_servers,service_model,mean,p50,p99,max,seed
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace corec
