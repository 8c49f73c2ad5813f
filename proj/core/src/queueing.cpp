#include "corec/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <iostream>
#include <ostream>
#include <queue>
#include <random>

namespace corec {

namespace {

void check_rates(double lambda, double mu) {
  if (lambda <= 0 || mu <= 0) {
    throw InvalidRate("rates must be positive (lambda=" + std::to_string(lambda) +
                      ", mu=" + std::to_string(mu) + ")");
  }
}

struct Event {
  double time;
  uint64_t order;  // insertion tiebreak
  enum Kind : uint8_t { kArrival, kDeparture } kind;
  unsigned server;   // departure only
  uint64_t id;       // arrival id (departure: the job finishing)
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.order > b.order;
  }
};

double nearest_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  const size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::max<size_t>(rank, 1) - 1];
}

}  // namespace

SojournStats simulate(const QueueModel& model, uint64_t n_arrivals, uint64_t seed,
                      double warmup_fraction) {
  check_rates(model.arrival_rate, model.service_rate);
  if (model.n_servers == 0) throw InvalidRate("n_servers must be >= 1");
  if (model.utilization() >= 1.0) {
    std::cerr << "queueing: warning: rho = " << model.utilization()
              << " >= 1, no steady state\n";
  }
  if (n_arrivals == 0) return SojournStats{};

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> interarrival(model.arrival_rate);
  std::exponential_distribution<double> exp_service(model.service_rate);
  const double det_service = 1.0 / model.service_rate;
  auto draw_service = [&] {
    return model.service == ServiceModel::kMarkovian ? exp_service(rng) : det_service;
  };

  const unsigned n_queues = model.topology == Topology::kSharedQueue ? 1 : model.n_servers;
  const unsigned servers_per_queue = model.topology == Topology::kSharedQueue ? model.n_servers : 1;
  std::uniform_int_distribution<unsigned> route(0, n_queues - 1);

  std::priority_queue<Event, std::vector<Event>, EventAfter> events;
  uint64_t order = 0;

  std::vector<std::deque<std::pair<uint64_t, double>>> waiting(n_queues);  // (id, t_arrival)
  std::vector<unsigned> busy(n_queues, 0);
  std::vector<double> arrival_time(n_arrivals);

  uint64_t next_arrival_id = 0;
  double t0 = interarrival(rng);
  events.push(Event{t0, order++, Event::kArrival, 0, next_arrival_id});

  std::vector<double> sojourns;
  sojourns.reserve(n_arrivals);
  const uint64_t warmup = static_cast<uint64_t>(static_cast<double>(n_arrivals) * warmup_fraction);

  // Little's-law bookkeeping: integrate the number in system over time.
  double area = 0;
  double last_t = 0;
  uint64_t in_system = 0;

  auto start_service = [&](unsigned q, uint64_t id, double now) {
    busy[q]++;
    events.push(Event{now + draw_service(), order++, Event::kDeparture, q, id});
  };

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    area += static_cast<double>(in_system) * (ev.time - last_t);
    last_t = ev.time;

    if (ev.kind == Event::kArrival) {
      const unsigned q = n_queues == 1 ? 0 : route(rng);
      arrival_time[ev.id] = ev.time;
      ++in_system;
      if (busy[q] < servers_per_queue) {
        start_service(q, ev.id, ev.time);
      } else {
        waiting[q].emplace_back(ev.id, ev.time);
      }
      if (++next_arrival_id < n_arrivals) {
        events.push(Event{ev.time + interarrival(rng), order++, Event::kArrival, 0,
                          next_arrival_id});
      }
    } else {
      --in_system;
      if (ev.id >= warmup) sojourns.push_back(ev.time - arrival_time[ev.id]);
      busy[ev.server]--;
      if (!waiting[ev.server].empty()) {
        const auto [id, _] = waiting[ev.server].front();
        waiting[ev.server].pop_front();
        start_service(ev.server, id, ev.time);
      }
    }
  }

  SojournStats stats;
  stats.count = sojourns.size();
  if (!sojourns.empty()) {
    double sum = 0;
    for (double s : sojourns) sum += s;
    stats.mean = sum / static_cast<double>(sojourns.size());
    std::sort(sojourns.begin(), sojourns.end());
    stats.p50 = nearest_rank(sojourns, 0.50);
    stats.p99 = nearest_rank(sojourns, 0.99);
    stats.max = sojourns.back();
  }
  stats.time_avg_in_system = last_t > 0 ? area / last_t : 0;
  return stats;
}

ErlangResult erlang_c(double lambda, double mu, unsigned n_servers) {
  check_rates(lambda, mu);
  if (n_servers == 0) throw InvalidRate("n_servers must be >= 1");
  const double a = lambda / mu;  // offered load in Erlangs
  const double rho = a / n_servers;
  if (rho >= 1.0) {
    throw Unstable("rho = " + std::to_string(rho) + " >= 1");
  }
  // Erlang-B by the stable recurrence, then convert to Erlang-C.
  double b = 1.0;
  for (unsigned k = 1; k <= n_servers; ++k) {
    b = a * b / (static_cast<double>(k) + a * b);
  }
  const double c = b / (1.0 - rho * (1.0 - b));
  const double wait = c / (static_cast<double>(n_servers) * mu - lambda);
  return ErlangResult{wait, wait + 1.0 / mu, c};
}

std::vector<SweepRow> sweep(const QueueModel& base, const std::vector<double>& loads,
                            const std::vector<uint64_t>& seeds, uint64_t n_arrivals) {
  std::vector<SweepRow> rows;
  rows.reserve(loads.size() * 2 * seeds.size());
  for (double load : loads) {
    for (Topology topo : {Topology::kSharedQueue, Topology::kPerServerQueue}) {
      for (uint64_t seed : seeds) {
        QueueModel m = base;
        m.topology = topo;
        m.arrival_rate = load * m.n_servers * m.service_rate;
        const SojournStats s = simulate(m, n_arrivals, seed);
        rows.push_back(SweepRow{load, topo, m.n_servers, m.service, s.mean, s.p50, s.p99, s.max,
                                seed});
      }
    }
  }
  return rows;
}

std::string topology_name(Topology t) {
  return t == Topology::kSharedQueue ? "scale-up" : "scale-out";
}

std::string service_name(ServiceModel s) {
  return s == ServiceModel::kMarkovian ? "markovian" : "deterministic";
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "load,topology,n_servers,service_model,mean,p50,p99,max,seed\n";
  for (const auto& r : rows) {
    os << r.load << ',' << topology_name(r.topology) << ',' << r.n_servers << ','
       << service_name(r.service) << ',' << r.mean << ',' << r.p50 << ',' << r.p99 << ','
       << r.max << ',' << r.seed << '\n';
  }
}

}  // namespace corec
