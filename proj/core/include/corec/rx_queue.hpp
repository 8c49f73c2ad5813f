#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "corec/mempool.hpp"
#include "corec/nic_ring.hpp"
#include "corec/txn_id.hpp"

namespace corec {

// Cooperative pause points inside rx_batch. kBeforeClaimCas sits between the
// rx_index load (plus buffer pre-reservation) and the claim CAS; kAfterClaim
// fires on a won CAS before any descriptor is touched; kAfterCopy fires after
// copy-and-replace, before the done bits are written. Hooks may block, which
// is exactly how tests emulate a descheduled thread.
enum class HookPoint { kBeforeClaimCas, kAfterClaim, kAfterCopy };

using RxHook = std::function<void(unsigned consumer, HookPoint, TxnId first, uint32_t count)>;

// What the claim CAS compares. kMonotonicId is the algorithm: an ever-growing
// 32-bit transaction ID whose epoch component makes a stale value
// unrepeatable within 2^32/RING_SIZE ring revolutions. kRawSlotIndex
// deliberately wraps the counter at the ring size, reintroducing the ABA
// hazard; it exists only so tests can demonstrate the failure the ID
// prevents.
enum class ClaimKey { kMonotonicId, kRawSlotIndex };

// Multi-consumer, non-blocking receive over one shared NicRing.
//
// Any number of threads may call rx_batch concurrently. Each call scans DD
// bits from the current rx_index, claims the scanned batch with a single
// compare-and-swap on the shared transaction ID, and on a win copies the
// packets out, re-arms the descriptors with pre-reserved buffers, and records
// completion in the READ_DONE bitmask (one fetch_or per touched word). A lost
// race is not retried inside the call — the caller's poll loop is the retry —
// so every call costs bounded work regardless of contention.
//
// Returning descriptors to the NIC must look like one coherent consumer, so
// the tail-release path runs under a try-acquire flag: the holder counts the
// contiguous run of done bits starting at the software tail, clears exactly
// those bits, and writes the new tail through the ring's transparency
// checker. A thread that fails the try-acquire simply skips release; it never
// waits.
class SharedRxQueue {
 public:
  static constexpr uint32_t kMaxBatch = 1024;

  // The ring's head must sit at slot_of(initial_id): IDs and slots advance in
  // lockstep from there on.
  SharedRxQueue(NicRing& ring, Mempool& pool, uint32_t batch_size = 32, TxnId initial_id = 0,
                ClaimKey claim_key = ClaimKey::kMonotonicId);

  SharedRxQueue(const SharedRxQueue&) = delete;
  SharedRxQueue& operator=(const SharedRxQueue&) = delete;

  // One receive attempt. Returns the number of packet buffers written to
  // out[0..n) — 0 on an empty scan, a lost claim race, or when the queue is
  // switched to single-consumer mode and this is not the designated
  // consumer. Always finishes with a release attempt. Throws PoolExhausted
  // if the replacement buffers cannot be reserved (the claim is never
  // issued in that case).
  uint32_t rx_batch(std::span<BufferHandle> out, unsigned consumer = 0);

  // Marks IDs [first, first+count) copied-and-replaced. One atomic OR per
  // touched bitmask word, in claim order. Callers must own the range (a won
  // CAS) — rx_batch does this itself; exposed for tests.
  void mark_done(TxnId first, uint32_t count);

  // Non-blocking tail release; returns descriptors released (0 if the flag
  // was held or no contiguous done run exists).
  uint32_t try_release();

  // Dynamic COREC on/off. When off, every consumer except the designated one
  // returns 0 from rx_batch without touching shared state.
  void set_corec_enabled(bool on) { enabled_.store(on, std::memory_order_release); }
  bool corec_enabled() const { return enabled_.load(std::memory_order_acquire); }

  TxnId rx_index() const { return rx_index_.load(std::memory_order_acquire); }
  TxnId sw_tail() const { return sw_tail_.load(std::memory_order_acquire); }
  uint32_t batch_size() const { return batch_size_; }
  NicRing& ring() { return ring_; }

  // True when every claimed ID has been released back to the NIC.
  bool fully_released() const { return rx_index() == sw_tail(); }
  // True when no READ_DONE bit is set (must hold when drained and idle).
  bool read_done_quiescent() const;
  bool done_bit(uint32_t slot) const;

  // Not thread-safe against running consumers; install before starting them.
  void set_hook(RxHook hook) { hook_ = std::move(hook); }

  // Instrumentation: take/drop the release trylock as if a concurrent
  // releaser were inside its bounded pass.
  bool try_hold_release_flag() { return !release_flag_.exchange(true, std::memory_order_acquire); }
  void drop_release_flag() { release_flag_.store(false, std::memory_order_release); }

  uint64_t claim_wins() const { return claim_wins_.load(std::memory_order_relaxed); }
  uint64_t claim_losses() const { return claim_losses_.load(std::memory_order_relaxed); }

  // Word/mask pairs covering slots [first_slot, first_slot+count) circularly,
  // one entry per touched 64-bit READ_DONE word, in claim order. Exposed so
  // tests can check word coverage directly.
  static std::vector<std::pair<uint32_t, uint64_t>> done_word_spans(uint32_t first_slot,
                                                                    uint32_t count,
                                                                    uint32_t ring_size);

 private:
  template <typename Fn>
  static void for_each_done_span(uint32_t first_slot, uint32_t count, uint32_t ring_size, Fn&& fn);

  NicRing& ring_;
  Mempool& pool_;
  uint32_t batch_size_;
  uint32_t ring_mask_;
  ClaimKey claim_key_;
  std::atomic<uint32_t> rx_index_;  // TxnId; raw slot index in kRawSlotIndex mode
  std::atomic<uint32_t> sw_tail_;   // TxnId of the next descriptor to release
  std::atomic<bool> release_flag_{false};
  std::atomic<bool> enabled_{true};
  unsigned designated_consumer_ = 0;
  std::vector<std::atomic<uint64_t>> done_words_;
  RxHook hook_;
  std::atomic<uint64_t> claim_wins_{0};
  std::atomic<uint64_t> claim_losses_{0};
};

}  // namespace corec
