#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "corec/errors.hpp"
#include "corec/packet.hpp"

namespace corec {

// Pre-allocated packet-buffer pool with linearizable single and bulk
// allocation, callable from any thread. The free list is a Treiber stack
// whose head packs {tag, index} into one 64-bit word; the tag advances on
// every successful push/pop so a bulk pop can traverse the chain and commit
// with a single CAS (all-or-nothing, no partial allocation).
//
// Buffer contents are NOT scrubbed on free, matching real descriptor buffers.
class Mempool {
 public:
  explicit Mempool(uint32_t capacity);

  Mempool(const Mempool&) = delete;
  Mempool& operator=(const Mempool&) = delete;

  uint32_t capacity() const { return capacity_; }
  // Exact only at quiescent points; a snapshot under concurrency.
  uint32_t free_count() const {
    return capacity_ - static_cast<uint32_t>(outstanding_.load(std::memory_order_acquire));
  }
  uint64_t outstanding() const { return outstanding_.load(std::memory_order_acquire); }

  // Pops exactly n distinct handles into out[0..n), or leaves the pool
  // untouched and returns false when fewer than n are free.
  bool try_bulk_alloc(uint32_t n, BufferHandle* out);

  // As try_bulk_alloc, but throws PoolExhausted on failure.
  void bulk_alloc(uint32_t n, BufferHandle* out);

  // Returns previously allocated handles. Throws DoubleFree if any handle is
  // not currently allocated. Empty spans are a no-op.
  void bulk_free(std::span<const BufferHandle> handles);

  BufferHandle alloc();
  void free_one(BufferHandle h) { bulk_free({&h, 1}); }

  Packet& packet(BufferHandle h) { return storage_[h]; }
  const Packet& packet(BufferHandle h) const { return storage_[h]; }

 private:
  static constexpr uint64_t kIndexMask = 0xFFFFFFFFull;
  static uint64_t pack(uint64_t tag, uint32_t index) { return (tag << 32) | index; }
  static uint32_t index_of(uint64_t head) { return static_cast<uint32_t>(head & kIndexMask); }
  static uint64_t tag_of(uint64_t head) { return head >> 32; }

  uint32_t capacity_;
  std::vector<Packet> storage_;
  std::vector<std::atomic<uint32_t>> next_;
  std::vector<std::atomic<uint8_t>> live_;  // ownership bit per handle
  std::atomic<uint64_t> head_;
  std::atomic<int64_t> outstanding_{0};
};

}  // namespace corec
