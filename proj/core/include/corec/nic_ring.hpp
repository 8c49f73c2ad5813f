#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "corec/errors.hpp"
#include "corec/mempool.hpp"
#include "corec/packet.hpp"
#include "corec/txn_id.hpp"

namespace corec {

// One ring slot. dd (the DD bit) is set by the NIC emulator once the slot's
// buffer holds a packet, and cleared by the consumer that copies the packet
// out. All packet writes become visible before dd is observed set.
//
// fill_count / release_count / last_filled are emulator-side bookkeeping for
// the ownership and transparency checks; consumers never read them.
struct Descriptor {
  std::atomic<bool> dd{false};
  std::atomic<BufferHandle> buf{kInvalidHandle};
  std::atomic<uint32_t> fill_count{0};          // the slot_generation counter
  std::atomic<uint32_t> release_count{0};       // mutated only on the tail-release path
  std::atomic<BufferHandle> last_filled{kInvalidHandle};
};

// Emulates the NIC side of one receive ring with hardware head/tail/DD
// semantics. The NIC owns slots [head, tail_register) circularly and stops
// filling when head == tail_register; software starts the tail one slot back
// (ixgbe convention, one slot permanently unused) so full and empty stay
// distinguishable.
//
// fill() must be driven by a single actor — the real device is one piece of
// hardware. observe_tail_write() may be called from any thread, but callers
// must guarantee mutual exclusion on that path (corec's release flag does);
// it is the transparency checker standing in for the TAIL register write.
class NicRing {
 public:
  NicRing(uint32_t ring_size, Mempool& pool, uint32_t initial_head_slot = 0);

  NicRing(const NicRing&) = delete;
  NicRing& operator=(const NicRing&) = delete;

  // Installs packets into free descriptors, advancing head; a packet that
  // finds the ring full is dropped and counted, mirroring NIC overflow.
  // Returns the number installed.
  size_t fill(std::span<const Packet> packets);
  size_t fill_one(const Packet& p) { return fill({&p, 1}); }

  // The emulated TAIL register write. Verifies the released range
  // (old_tail, new_tail] is strictly contiguous, copied out (dd clear),
  // filled exactly once since its previous release, and re-armed with a
  // fresh buffer. Throws TransparencyViolation otherwise (counting it
  // first); new_tail == old tail is accepted as a no-op.
  void observe_tail_write(uint32_t new_tail);

  struct Snapshot {
    uint32_t head;
    uint32_t tail_register;
    uint64_t dropped;
  };
  Snapshot snapshot() const;

  uint32_t size() const { return size_; }
  uint32_t mask() const { return mask_; }
  Descriptor& slot(uint32_t i) { return slots_[i]; }
  const Descriptor& slot(uint32_t i) const { return slots_[i]; }
  Mempool& pool() { return pool_; }

  uint32_t free_slots() const;  // circular distance head -> tail_register

  uint64_t installed_count() const { return installed_.load(std::memory_order_acquire); }
  uint64_t dropped_count() const { return dropped_.load(std::memory_order_acquire); }
  // Total descriptors returned through accepted tail writes.
  uint64_t released_count() const { return released_.load(std::memory_order_acquire); }
  uint64_t transparency_violations() const { return violations_.load(std::memory_order_acquire); }

 private:
  uint32_t size_;
  uint32_t mask_;
  Mempool& pool_;
  std::vector<Descriptor> slots_;
  std::atomic<uint32_t> head_;
  std::atomic<uint32_t> tail_register_;
  std::atomic<uint64_t> installed_{0};
  std::atomic<uint64_t> dropped_{0};
  std::atomic<uint64_t> released_{0};
  std::atomic<uint64_t> violations_{0};
};

}  // namespace corec
