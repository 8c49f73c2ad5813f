#include "corec/rx_queue.hpp"

#include <algorithm>
#include <cassert>
#include <string>

namespace corec {

namespace {

// Drops the release flag even if the transparency checker throws; a stuck
// flag would silently disable every later release attempt.
struct FlagGuard {
  std::atomic<bool>& flag;
  ~FlagGuard() { flag.store(false, std::memory_order_release); }
};

}  // namespace

SharedRxQueue::SharedRxQueue(NicRing& ring, Mempool& pool, uint32_t batch_size, TxnId initial_id,
                             ClaimKey claim_key)
    : ring_(ring),
      pool_(pool),
      batch_size_(batch_size),
      ring_mask_(ring.mask()),
      claim_key_(claim_key),
      done_words_((ring.size() + 63) / 64) {
  if (batch_size_ == 0 || batch_size_ > kMaxBatch || batch_size_ > ring_.size()) {
    throw ConfigError("batch size " + std::to_string(batch_size) + " out of range for ring of " +
                      std::to_string(ring_.size()));
  }
  if (slot_of(initial_id, ring_.size()) != ring_.snapshot().head) {
    throw ConfigError("initial transaction ID does not map to the ring head slot");
  }
  const uint32_t start =
      claim_key_ == ClaimKey::kMonotonicId ? initial_id : slot_of(initial_id, ring_.size());
  rx_index_.store(start, std::memory_order_relaxed);
  sw_tail_.store(start, std::memory_order_relaxed);
  for (auto& w : done_words_) w.store(0, std::memory_order_relaxed);
}

uint32_t SharedRxQueue::rx_batch(std::span<BufferHandle> out, unsigned consumer) {
  if (!enabled_.load(std::memory_order_acquire) && consumer != designated_consumer_) return 0;

  const uint32_t loaded = rx_index_.load(std::memory_order_seq_cst);

  // DD scan: how many descriptors from slot(loaded) did the NIC fill?
  const uint32_t limit = std::min<size_t>(batch_size_, out.size());
  uint32_t found = 0;
  while (found < limit) {
    const Descriptor& d = ring_.slot((loaded + found) & ring_mask_);
    if (!d.dd.load(std::memory_order_acquire)) break;
    ++found;
  }

  uint32_t delivered = 0;
  if (found > 0) {
    // Reserve the replacement buffers before claiming, so a won batch can
    // always be re-armed; a lost race hands them straight back.
    BufferHandle fresh[kMaxBatch];
    if (!pool_.try_bulk_alloc(found, fresh)) {
      try_release();
      throw PoolExhausted("rx_batch: no replacement buffers for a batch of " +
                          std::to_string(found));
    }
    if (hook_) hook_(consumer, HookPoint::kBeforeClaimCas, loaded, found);

    uint32_t expected = loaded;
    const uint32_t next = claim_key_ == ClaimKey::kMonotonicId
                              ? loaded + found
                              : ((loaded + found) & ring_mask_);
    if (rx_index_.compare_exchange_strong(expected, next, std::memory_order_seq_cst)) {
      claim_wins_.fetch_add(1, std::memory_order_relaxed);
      if (hook_) hook_(consumer, HookPoint::kAfterClaim, loaded, found);
      for (uint32_t j = 0; j < found; ++j) {
        Descriptor& d = ring_.slot((loaded + j) & ring_mask_);
        out[j] = d.buf.load(std::memory_order_relaxed);
        d.buf.store(fresh[j], std::memory_order_relaxed);
        d.dd.store(false, std::memory_order_release);
      }
      delivered = found;
      if (hook_) hook_(consumer, HookPoint::kAfterCopy, loaded, found);
      mark_done(loaded, found);
    } else {
      claim_losses_.fetch_add(1, std::memory_order_relaxed);
      pool_.bulk_free({fresh, found});
    }
  }

  try_release();  // win, lose, or empty: always offer to move the tail
  return delivered;
}

template <typename Fn>
void SharedRxQueue::for_each_done_span(uint32_t first_slot, uint32_t count, uint32_t ring_size,
                                       Fn&& fn) {
  // The claim range never exceeds the ring, so each slot appears once; a
  // wrapped range splits into [first, ring) and [0, rest).
  uint32_t slot = first_slot & (ring_size - 1);
  uint32_t remaining = count;
  while (remaining > 0) {
    const uint32_t word = slot >> 6;
    const uint32_t bit = slot & 63;
    const uint32_t to_ring_end = ring_size - slot;
    const uint32_t span = std::min({remaining, 64 - bit, to_ring_end});
    const uint64_t mask = (span == 64 ? ~0ull : ((1ull << span) - 1)) << bit;
    fn(word, mask);
    slot = (slot + span) & (ring_size - 1);
    remaining -= span;
  }
}

std::vector<std::pair<uint32_t, uint64_t>> SharedRxQueue::done_word_spans(uint32_t first_slot,
                                                                          uint32_t count,
                                                                          uint32_t ring_size) {
  std::vector<std::pair<uint32_t, uint64_t>> spans;
  for_each_done_span(first_slot, count, ring_size,
                     [&](uint32_t w, uint64_t m) { spans.emplace_back(w, m); });
  return spans;
}

void SharedRxQueue::mark_done(TxnId first, uint32_t count) {
  assert(count <= ring_.size());
  for_each_done_span(slot_of(first, ring_.size()), count, ring_.size(),
                     [&](uint32_t w, uint64_t m) {
                       done_words_[w].fetch_or(m, std::memory_order_acq_rel);
                     });
}

uint32_t SharedRxQueue::try_release() {
  if (release_flag_.exchange(true, std::memory_order_acquire)) return 0;
  FlagGuard guard{release_flag_};

  // Only the flag holder mutates sw_tail, so this read is private.
  const TxnId tail = sw_tail_.load(std::memory_order_relaxed);
  const uint32_t ring_size = ring_.size();
  uint32_t run = 0;
  while (run < ring_size) {
    const uint32_t s = (tail + run) & ring_mask_;
    if (!((done_words_[s >> 6].load(std::memory_order_acquire) >> (s & 63)) & 1)) break;
    ++run;
  }
  if (run == 0) return 0;

  // Clear exactly the counted run, then hand the batch to the NIC as one
  // contiguous tail move.
  for_each_done_span(slot_of(tail, ring_size), run, ring_size, [&](uint32_t w, uint64_t m) {
    done_words_[w].fetch_and(~m, std::memory_order_acq_rel);
  });
  ring_.observe_tail_write((tail + run - 1) & ring_mask_);
  sw_tail_.store(tail + run, std::memory_order_release);
  return run;
}

bool SharedRxQueue::read_done_quiescent() const {
  for (const auto& w : done_words_) {
    if (w.load(std::memory_order_acquire) != 0) return false;
  }
  return true;
}

bool SharedRxQueue::done_bit(uint32_t slot) const {
  return (done_words_[slot >> 6].load(std::memory_order_acquire) >> (slot & 63)) & 1;
}

}  // namespace corec
