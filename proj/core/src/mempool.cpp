#include "corec/mempool.hpp"

#include <string>

namespace corec {

Mempool::Mempool(uint32_t capacity)
    : capacity_(capacity),
      storage_(capacity),
      next_(capacity),
      live_(capacity) {
  // Free list initially holds every handle; handle 0 ends up deepest.
  for (uint32_t i = 0; i < capacity; ++i) {
    next_[i].store(i == 0 ? kInvalidHandle : i - 1, std::memory_order_relaxed);
    live_[i].store(0, std::memory_order_relaxed);
  }
  head_.store(pack(0, capacity == 0 ? kInvalidHandle : capacity - 1), std::memory_order_release);
}

bool Mempool::try_bulk_alloc(uint32_t n, BufferHandle* out) {
  if (n == 0) return true;
  for (;;) {
    const uint64_t head = head_.load(std::memory_order_acquire);
    uint32_t cursor = index_of(head);
    uint32_t got = 0;
    while (got < n && cursor != kInvalidHandle) {
      out[got++] = cursor;
      cursor = next_[cursor].load(std::memory_order_relaxed);
    }
    if (got < n) {
      // Chain looked short. Only report exhaustion if nothing moved under us.
      if (head_.load(std::memory_order_acquire) == head) return false;
      continue;
    }
    // The traversal is only valid if no push/pop happened since `head` was
    // read; the tag guarantees the CAS fails otherwise.
    const uint64_t next_head = pack(tag_of(head) + 1, cursor);
    uint64_t expected = head;
    if (head_.compare_exchange_strong(expected, next_head, std::memory_order_acq_rel)) {
      for (uint32_t i = 0; i < n; ++i) live_[out[i]].store(1, std::memory_order_relaxed);
      outstanding_.fetch_add(n, std::memory_order_acq_rel);
      return true;
    }
  }
}

void Mempool::bulk_alloc(uint32_t n, BufferHandle* out) {
  if (!try_bulk_alloc(n, out)) {
    throw PoolExhausted("mempool: cannot reserve " + std::to_string(n) + " buffers (" +
                        std::to_string(free_count()) + " free of " + std::to_string(capacity_) + ")");
  }
}

void Mempool::bulk_free(std::span<const BufferHandle> handles) {
  if (handles.empty()) return;
  for (BufferHandle h : handles) {
    if (h >= capacity_ || live_[h].exchange(0, std::memory_order_acq_rel) == 0) {
      throw DoubleFree("mempool: handle " + std::to_string(h) + " freed while not allocated");
    }
  }
  // Link the batch locally, then splice it in with one CAS.
  for (size_t i = 0; i + 1 < handles.size(); ++i) {
    next_[handles[i]].store(handles[i + 1], std::memory_order_relaxed);
  }
  const BufferHandle chain_head = handles.front();
  const BufferHandle chain_tail = handles.back();
  for (;;) {
    const uint64_t head = head_.load(std::memory_order_acquire);
    next_[chain_tail].store(index_of(head), std::memory_order_relaxed);
    uint64_t expected = head;
    if (head_.compare_exchange_strong(expected, pack(tag_of(head) + 1, chain_head),
                                      std::memory_order_acq_rel)) {
      break;
    }
  }
  outstanding_.fetch_sub(static_cast<int64_t>(handles.size()), std::memory_order_acq_rel);
}

BufferHandle Mempool::alloc() {
  BufferHandle h;
  bulk_alloc(1, &h);
  return h;
}

}  // namespace corec
