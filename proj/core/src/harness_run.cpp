#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <optional>
#include <queue>
#include <random>
#include <thread>

#include "corec/baseline.hpp"
#include "corec/harness.hpp"
#include "corec/mempool.hpp"
#include "corec/nic_ring.hpp"

namespace corec {

namespace {

int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void spin_work(uint64_t iters) {
  for (uint64_t i = 0; i < iters; ++i) {
    asm volatile("" ::: "memory");
  }
}

// Synthetic traffic source: sequenced packets with uniform flows and either a
// fixed size or the heavy-tailed 64..1500B mix standing in for trace replay.
class PacketFactory {
 public:
  PacketFactory(const ExperimentConfig& cfg, uint64_t seed)
      : cfg_(cfg),
        rng_(seed),
        flow_(0, cfg.flow_count - 1),
        size_index_({50, 15, 10, 8, 7, 10}) {}

  Packet make(int64_t t_inject) {
    static constexpr uint32_t kSizes[] = {64, 128, 256, 512, 1024, 1500};
    Packet p;
    p.seq = next_seq_++;
    p.flow_id = flow_(rng_);
    p.size_bytes = cfg_.arrival.process == ArrivalProcess::kMixedSizes
                       ? kSizes[size_index_(rng_)]
                       : cfg_.packet_size;
    p.t_inject = t_inject;
    return p;
  }

 private:
  const ExperimentConfig& cfg_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<uint32_t> flow_;
  std::discrete_distribution<uint32_t> size_index_;
  uint64_t next_seq_ = 0;
};

class InterarrivalDraw {
 public:
  InterarrivalDraw(const ArrivalSpec& arrival, uint64_t seed)
      : poisson_(arrival.process != ArrivalProcess::kConstant),
        mean_ns_(1e9 / arrival.rate_pps),
        rng_(seed),
        exp_(arrival.rate_pps / 1e9) {}

  double next() { return poisson_ ? exp_(rng_) : mean_ns_; }

 private:
  bool poisson_;
  double mean_ns_;
  std::mt19937_64 rng_;
  std::exponential_distribution<double> exp_;
};

int64_t sim_service_cost(const ExperimentConfig& cfg, const Packet& p) {
  return cfg.service_ns +
         static_cast<int64_t>(cfg.service_ns_per_byte * static_cast<double>(p.size_bytes));
}

struct DeliveryLog {
  std::vector<Packet> packets;
  void finish_sorted() {
    std::stable_sort(packets.begin(), packets.end(),
                     [](const Packet& a, const Packet& b) { return a.t_deliver < b.t_deliver; });
  }
};

void aggregate_reports(RunResult& r) {
  if (!r.delivered_packets.empty()) {
    r.latency = latency_analyze(r.delivered_packets);
    std::vector<uint64_t> seqs(r.delivered_packets.size());
    std::vector<uint32_t> flows(r.delivered_packets.size());
    for (size_t i = 0; i < r.delivered_packets.size(); ++i) {
      seqs[i] = r.delivered_packets[i].seq;
      flows[i] = r.delivered_packets[i].flow_id;
    }
    r.reorder = reorder_analyze(seqs, flows);
    r.reorder_global = reorder_analyze_global(seqs);
  }
  r.throughput_pps =
      r.elapsed_seconds > 0 ? static_cast<double>(r.delivered) / r.elapsed_seconds : 0;
}

// ---------------------------------------------------------------------------
// Simulated clock: one thread, event heap in simulated nanoseconds.
// ---------------------------------------------------------------------------

struct SimEvent {
  int64_t t;
  uint64_t order;
  enum Kind : uint8_t { kArrival, kPoll } kind;
  unsigned idx;  // consumer / lane
};

struct SimEventAfter {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.order > b.order;
  }
};

class SimLoop {
 public:
  void push(SimEvent ev) {
    ev.order = order_++;
    heap_.push(ev);
  }
  bool empty() const { return heap_.empty(); }
  SimEvent pop() {
    SimEvent ev = heap_.top();
    heap_.pop();
    return ev;
  }

 private:
  std::priority_queue<SimEvent, std::vector<SimEvent>, SimEventAfter> heap_;
  uint64_t order_ = 0;
};

RunResult run_simulated(const ExperimentConfig& cfg) {
  RunResult result;
  result.trace.claims_by_thread.resize(cfg.mode == Mode::kCorec ? cfg.threads : 0);
  result.per_queue_delivered.assign(cfg.threads, 0);

  const uint32_t pool_capacity = 4 * cfg.ring_size;
  // Corec: one shared lane. Baseline: one lane per thread.
  std::optional<Mempool> corec_pool;
  std::optional<NicRing> corec_ring;
  std::optional<SharedRxQueue> corec_queue;
  std::optional<ScaleOutTopology> topo;
  if (cfg.mode == Mode::kCorec) {
    corec_pool.emplace(pool_capacity);
    corec_ring.emplace(cfg.ring_size, *corec_pool);
    corec_queue.emplace(*corec_ring, *corec_pool, cfg.batch_size);
    if (cfg.record_claims) {
      corec_queue->set_hook([&](unsigned consumer, HookPoint point, TxnId first, uint32_t count) {
        if (point == HookPoint::kAfterClaim) {
          result.trace.claims_by_thread[consumer].push_back(ClaimRecord{first, count});
        }
      });
    }
  } else {
    topo.emplace(cfg.threads, cfg.ring_size, cfg.batch_size, pool_capacity);
  }

  PacketFactory factory(cfg, cfg.seed);
  InterarrivalDraw gaps(cfg.arrival, cfg.seed ^ 0x9e3779b97f4a7c15ull);

  SimLoop loop;
  uint64_t scheduled_arrivals = 0;
  uint64_t arrivals_processed = 0;
  DeliveryLog log;
  log.packets.reserve(cfg.packet_budget);
  int64_t last_completion = 0;

  loop.push(SimEvent{static_cast<int64_t>(gaps.next()), 0, SimEvent::kArrival, 0});
  scheduled_arrivals = 1;
  for (unsigned k = 0; k < cfg.threads; ++k) {
    loop.push(SimEvent{0, 0, SimEvent::kPoll, k});
  }

  std::vector<BufferHandle> out(cfg.batch_size);
  while (!loop.empty()) {
    const SimEvent ev = loop.pop();
    if (ev.kind == SimEvent::kArrival) {
      const Packet p = factory.make(ev.t);
      NicRing& ring = cfg.mode == Mode::kCorec ? *corec_ring : topo->ring(topo->dispatch(p.flow_id));
      if (ring.fill_one(p) == 1) {
        result.trace.installed_seqs.push_back(p.seq);
      }
      ++result.offered;
      ++arrivals_processed;
      if (scheduled_arrivals < cfg.packet_budget) {
        loop.push(SimEvent{ev.t + static_cast<int64_t>(gaps.next()), 0, SimEvent::kArrival, 0});
        ++scheduled_arrivals;
      }
      continue;
    }

    const unsigned k = ev.idx;
    Mempool& pool = cfg.mode == Mode::kCorec ? *corec_pool : topo->pool(k);
    const uint32_t n = cfg.mode == Mode::kCorec
                           ? corec_queue->rx_batch({out.data(), out.size()}, k)
                           : topo->queue(k).rx_batch_single({out.data(), out.size()});
    if (n > 0) {
      int64_t t = ev.t;
      for (uint32_t j = 0; j < n; ++j) {
        Packet p = pool.packet(out[j]);
        t += sim_service_cost(cfg, p);
        p.t_deliver = t;
        log.packets.push_back(p);
      }
      pool.bulk_free({out.data(), n});
      result.per_queue_delivered[k] += n;
      result.delivered += n;
      last_completion = std::max(last_completion, t);
      loop.push(SimEvent{t, 0, SimEvent::kPoll, k});
    } else {
      const bool arrivals_done = arrivals_processed == cfg.packet_budget;
      const bool drained = result.delivered == result.trace.installed_seqs.size();
      const bool released =
          cfg.mode != Mode::kCorec || (corec_queue->fully_released() && corec_queue->read_done_quiescent());
      if (!(arrivals_done && drained && released)) {
        loop.push(SimEvent{ev.t + cfg.poll_interval_ns, 0, SimEvent::kPoll, k});
      }
      // else: this consumer retires; the loop ends once every poll retires.
    }
  }

  log.finish_sorted();
  result.delivered_packets = std::move(log.packets);
  result.installed = result.trace.installed_seqs.size();
  if (cfg.mode == Mode::kCorec) {
    result.dropped = corec_ring->dropped_count();
    result.transparency_violations = corec_ring->transparency_violations();
    result.trace.fully_released = corec_queue->fully_released();
    result.trace.read_done_quiescent = corec_queue->read_done_quiescent();
    result.trace.released_total = corec_ring->released_count();
  } else {
    for (unsigned i = 0; i < cfg.threads; ++i) {
      result.dropped += topo->ring(i).dropped_count();
      result.transparency_violations += topo->ring(i).transparency_violations();
      result.trace.released_total += topo->ring(i).released_count();
    }
  }
  result.elapsed_seconds = static_cast<double>(last_completion) / 1e9;
  aggregate_reports(result);
  return result;
}

// ---------------------------------------------------------------------------
// Wall clock: real threads, steady_clock timestamps.
// ---------------------------------------------------------------------------

struct WallShared {
  std::atomic<bool> stop{false};
  std::atomic<bool> abort{false};
  std::atomic<bool> injection_done{false};
  std::atomic<uint64_t> delivered{0};
  std::exception_ptr first_error;
  std::mutex error_mu;

  void record_error() {
    {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!first_error) first_error = std::current_exception();
    }
    abort.store(true, std::memory_order_release);
  }
};

struct PerThreadLog {
  std::vector<Packet> packets;
  uint64_t count = 0;
};

RunResult run_wall(const ExperimentConfig& cfg) {
  RunResult result;
  result.trace.claims_by_thread.resize(cfg.mode == Mode::kCorec ? cfg.threads : 0);
  result.per_queue_delivered.assign(cfg.threads, 0);

  const uint32_t pool_capacity = 4 * cfg.ring_size;
  std::optional<Mempool> corec_pool;
  std::optional<NicRing> corec_ring;
  std::optional<SharedRxQueue> corec_queue;
  std::optional<ScaleOutTopology> topo;

  std::atomic<bool> stall_fired{false};
  const HookPoint stall_hook_point = cfg.stall && cfg.stall->point == StallPoint::kAfterCopy
                                         ? HookPoint::kAfterCopy
                                         : HookPoint::kAfterClaim;

  if (cfg.mode == Mode::kCorec) {
    corec_pool.emplace(pool_capacity);
    corec_ring.emplace(cfg.ring_size, *corec_pool);
    corec_queue.emplace(*corec_ring, *corec_pool, cfg.batch_size);
    corec_queue->set_hook([&](unsigned consumer, HookPoint point, TxnId first, uint32_t count) {
      if (cfg.record_claims && point == HookPoint::kAfterClaim) {
        result.trace.claims_by_thread[consumer].push_back(ClaimRecord{first, count});
      }
      if (cfg.stall && consumer == cfg.stall->thread_id && point == stall_hook_point &&
          !stall_fired.exchange(true, std::memory_order_acq_rel)) {
        std::this_thread::sleep_for(std::chrono::nanoseconds(cfg.stall->duration_ns));
      }
    });
  } else {
    topo.emplace(cfg.threads, cfg.ring_size, cfg.batch_size, pool_capacity);
  }

  WallShared shared;
  std::vector<PerThreadLog> logs(cfg.threads);

  const int64_t t_start = now_ns();

  std::thread nic([&] {
    try {
      PacketFactory factory(cfg, cfg.seed);
      uint64_t offered = 0;
      auto target_ring = [&](const Packet& p) -> NicRing& {
        return cfg.mode == Mode::kCorec ? *corec_ring : topo->ring(topo->dispatch(p.flow_id));
      };
      if (cfg.arrival.rate_pps <= 0) {
        // Unpaced: offer exactly what fits so every offer installs.
        std::vector<Packet> burst;
        while (offered < cfg.packet_budget && !shared.abort.load(std::memory_order_acquire)) {
          if (cfg.mode == Mode::kCorec) {
            const uint32_t space =
                std::min<uint64_t>(std::min<uint64_t>(corec_ring->free_slots(), 64),
                                   cfg.packet_budget - offered);
            if (space == 0) {
              std::this_thread::yield();
              continue;
            }
            burst.clear();
            const int64_t t = now_ns();
            for (uint32_t i = 0; i < space; ++i) burst.push_back(factory.make(t));
            corec_ring->fill(burst);
            for (const Packet& p : burst) result.trace.installed_seqs.push_back(p.seq);
            offered += space;
          } else {
            Packet p = factory.make(now_ns());
            NicRing& ring = target_ring(p);
            if (ring.free_slots() == 0) {
              std::this_thread::yield();
              continue;
            }
            ring.fill_one(p);
            result.trace.installed_seqs.push_back(p.seq);
            ++offered;
          }
        }
      } else {
        // Paced: blind offers on the arrival schedule; full ring drops count.
        InterarrivalDraw gaps(cfg.arrival, cfg.seed ^ 0x9e3779b97f4a7c15ull);
        double t_next = static_cast<double>(now_ns());
        while (offered < cfg.packet_budget && !shared.abort.load(std::memory_order_acquire)) {
          t_next += gaps.next();
          double wait = t_next - static_cast<double>(now_ns());
          if (wait > 100e3) {
            std::this_thread::sleep_for(
                std::chrono::nanoseconds(static_cast<int64_t>(wait - 50e3)));
          }
          while (static_cast<double>(now_ns()) < t_next) {
            // sub-100us residue: spin for pacing accuracy
          }
          Packet p = factory.make(now_ns());
          if (target_ring(p).fill_one(p) == 1) {
            result.trace.installed_seqs.push_back(p.seq);
          }
          ++offered;
        }
      }
      result.offered = offered;
    } catch (...) {
      shared.record_error();
    }
    shared.injection_done.store(true, std::memory_order_release);
  });

  std::vector<std::thread> consumers;
  consumers.reserve(cfg.threads);
  for (unsigned k = 0; k < cfg.threads; ++k) {
    consumers.emplace_back([&, k] {
      try {
        std::mt19937_64 rng(cfg.seed ^ (0x517cc1b727220a95ull * (k + 1)));
        std::vector<BufferHandle> out(cfg.batch_size);
        PerThreadLog& log = logs[k];
        Mempool& pool = cfg.mode == Mode::kCorec ? *corec_pool : topo->pool(k);
        uint32_t idle = 0;
        while (!shared.stop.load(std::memory_order_acquire)) {
          const uint32_t n = cfg.mode == Mode::kCorec
                                 ? corec_queue->rx_batch({out.data(), out.size()}, k)
                                 : topo->queue(k).rx_batch_single({out.data(), out.size()});
          if (n > 0) {
            idle = 0;
            for (uint32_t j = 0; j < n; ++j) {
              if (cfg.service_spin > 0) spin_work(cfg.service_spin);
              Packet p = pool.packet(out[j]);
              p.t_deliver = now_ns();
              log.packets.push_back(p);
            }
            pool.bulk_free({out.data(), n});
            log.count += n;
            shared.delivered.fetch_add(n, std::memory_order_acq_rel);
          } else if (++idle % 64 == 0) {
            std::this_thread::yield();
          }
          if (cfg.jitter_ns_max > 0 && (rng() & 1023) == 0) {
            std::this_thread::sleep_for(
                std::chrono::nanoseconds(static_cast<int64_t>(rng() % cfg.jitter_ns_max)));
          }
        }
      } catch (...) {
        shared.record_error();
      }
    });
  }

  nic.join();
  const uint64_t installed = result.trace.installed_seqs.size();
  while (!shared.abort.load(std::memory_order_acquire)) {
    const bool drained = shared.delivered.load(std::memory_order_acquire) == installed;
    const bool released = cfg.mode != Mode::kCorec ||
                          (corec_queue->fully_released() && corec_queue->read_done_quiescent());
    if (shared.injection_done.load(std::memory_order_acquire) && drained && released) break;
    std::this_thread::sleep_for(std::chrono::microseconds(200));
  }
  shared.stop.store(true, std::memory_order_release);
  for (auto& t : consumers) t.join();

  result.elapsed_seconds = static_cast<double>(now_ns() - t_start) / 1e9;
  result.installed = installed;
  result.delivered = shared.delivered.load(std::memory_order_acquire);
  if (cfg.mode == Mode::kCorec) {
    result.dropped = corec_ring->dropped_count();
    result.transparency_violations = corec_ring->transparency_violations();
    result.trace.fully_released = corec_queue->fully_released();
    result.trace.read_done_quiescent = corec_queue->read_done_quiescent();
    result.trace.released_total = corec_ring->released_count();
  } else {
    for (unsigned i = 0; i < cfg.threads; ++i) {
      result.dropped += topo->ring(i).dropped_count();
      result.transparency_violations += topo->ring(i).transparency_violations();
      result.trace.released_total += topo->ring(i).released_count();
    }
  }
  for (unsigned k = 0; k < cfg.threads; ++k) result.per_queue_delivered[k] = logs[k].count;

  // Merge per-thread logs into one delivery-ordered stream.
  size_t total = 0;
  for (const auto& log : logs) total += log.packets.size();
  result.delivered_packets.reserve(total);
  for (const auto& log : logs) {
    result.delivered_packets.insert(result.delivered_packets.end(), log.packets.begin(),
                                    log.packets.end());
  }
  std::stable_sort(result.delivered_packets.begin(), result.delivered_packets.end(),
                   [](const Packet& a, const Packet& b) { return a.t_deliver < b.t_deliver; });

  if (shared.first_error) std::rethrow_exception(shared.first_error);
  aggregate_reports(result);
  return result;
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  config.validate();
  return config.clock == ClockMode::kSimulated ? run_simulated(config) : run_wall(config);
}

}  // namespace corec
