#pragma once

#include <array>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "corec/mempool.hpp"
#include "corec/nic_ring.hpp"
#include "corec/packet.hpp"
#include "corec/rx_queue.hpp"

namespace corec::test {

// Parks chosen consumers at a chosen hook point until released, emulating a
// descheduled thread at an exact algorithm step. Also records every
// kAfterCopy event per consumer so tests can see what a thread copied even
// if its call later throws.
class HookGate {
 public:
  void arm(unsigned consumer, HookPoint point) {
    std::lock_guard<std::mutex> lk(mu_);
    armed_.insert(consumer);
    point_ = point;
  }

  RxHook hook() {
    return [this](unsigned consumer, HookPoint point, TxnId first, uint32_t count) {
      if (point == HookPoint::kAfterCopy && consumer < copies_.size()) {
        copies_[consumer].emplace_back(first, count);
      }
      std::unique_lock<std::mutex> lk(mu_);
      if (released_ || point != point_ || armed_.find(consumer) == armed_.end()) return;
      ++parked_;
      cv_.notify_all();
      cv_.wait(lk, [&] { return released_; });
      --parked_;
    };
  }

  void wait_parked(unsigned n = 1) {
    std::unique_lock<std::mutex> lk(mu_);
    cv_.wait(lk, [&] { return parked_ >= n; });
  }

  void release_all() {
    std::lock_guard<std::mutex> lk(mu_);
    released_ = true;
    cv_.notify_all();
  }

  const std::vector<std::pair<TxnId, uint32_t>>& copies(unsigned consumer) const {
    return copies_[consumer];
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::set<unsigned> armed_;
  HookPoint point_ = HookPoint::kBeforeClaimCas;
  unsigned parked_ = 0;
  bool released_ = false;
  std::array<std::vector<std::pair<TxnId, uint32_t>>, 8> copies_;
};

inline Packet make_packet(uint64_t seq, uint32_t flow = 0, uint32_t size = 64,
                          int64_t t_inject = 0) {
  Packet p;
  p.seq = seq;
  p.flow_id = flow;
  p.size_bytes = size;
  p.t_inject = t_inject;
  return p;
}

inline std::vector<Packet> make_packets(uint64_t first_seq, size_t n) {
  std::vector<Packet> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(make_packet(first_seq + i));
  return out;
}

inline void require(bool cond, const char* what) {
  if (!cond) throw std::logic_error(std::string("scenario precondition failed: ") + what);
}

struct AbaOutcome {
  std::vector<uint64_t> stepped_delivered;  // thread B, driven step by step
  std::vector<uint64_t> parked_delivered;   // thread A, resumed after the wrap
  uint32_t parked_returned = 0;
  bool parked_saw_violation = false;
  uint64_t violations = 0;
  TxnId final_rx_index = 0;
};

// The wrap-around interleaving (ring of 4, batch of 2): thread A loads the
// claim counter and parks right before its CAS; thread B then processes one
// full ring revolution, recycling A's observed buffers through the pool so
// the slots A scanned now hold stale, already-delivered packet data. With the
// raw wrapped index the counter returns to A's loaded value and the stale CAS
// succeeds (duplicates delivered); with the monotonic ID it cannot.
AbaOutcome run_aba_scenario(ClaimKey key);

}  // namespace corec::test
