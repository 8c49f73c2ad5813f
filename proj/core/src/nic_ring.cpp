#include "corec/nic_ring.hpp"

#include <cassert>
#include <string>

namespace corec {

NicRing::NicRing(uint32_t ring_size, Mempool& pool, uint32_t initial_head_slot)
    : size_(ring_size), mask_(ring_size - 1), pool_(pool), slots_(ring_size) {
  if (!is_power_of_two(ring_size)) {
    throw NotPowerOfTwo("ring size must be a power of two, got " + std::to_string(ring_size));
  }
  // Every descriptor starts armed with a buffer, ready for the NIC.
  for (auto& d : slots_) {
    d.buf.store(pool_.alloc(), std::memory_order_relaxed);
  }
  head_.store(initial_head_slot & mask_, std::memory_order_relaxed);
  tail_register_.store((initial_head_slot - 1) & mask_, std::memory_order_release);
}

size_t NicRing::fill(std::span<const Packet> packets) {
  uint32_t head = head_.load(std::memory_order_relaxed);
  size_t installed = 0;
  for (const Packet& p : packets) {
    if (head == tail_register_.load(std::memory_order_acquire)) {
      dropped_.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    Descriptor& d = slots_[head];
    // A slot inside [head, tail) was returned by software with dd clear; a
    // set bit here means the emulator itself is broken, not the consumers.
    assert(!d.dd.load(std::memory_order_relaxed) && "NIC asked to fill a slot with DD still set");
    const BufferHandle b = d.buf.load(std::memory_order_relaxed);
    pool_.packet(b) = p;
    d.last_filled.store(b, std::memory_order_relaxed);
    d.fill_count.fetch_add(1, std::memory_order_relaxed);
    // Advance head before publishing DD: anyone who observed DD set (and
    // everything ordered after it, the release checker included) then sees
    // head already past this slot.
    head = (head + 1) & mask_;
    head_.store(head, std::memory_order_release);
    d.dd.store(true, std::memory_order_release);  // publish: packet before DD
    installed_.fetch_add(1, std::memory_order_relaxed);
    ++installed;
  }
  return installed;
}

void NicRing::observe_tail_write(uint32_t new_tail) {
  const uint32_t old_tail = tail_register_.load(std::memory_order_relaxed);
  const uint32_t dist = (new_tail - old_tail) & mask_;
  if (dist == 0) return;  // zero-length release

  const uint32_t head = head_.load(std::memory_order_relaxed);
  const uint32_t nic_owned = (old_tail - head) & mask_;  // slots still awaiting fill
  auto violate = [&](uint32_t s, const char* what) {
    violations_.fetch_add(1, std::memory_order_acq_rel);
    throw TransparencyViolation("tail write " + std::to_string(old_tail) + " -> " +
                                std::to_string(new_tail) + ": slot " + std::to_string(s) + " " + what);
  };

  // Validate the whole range before committing anything.
  for (uint32_t k = 1; k <= dist; ++k) {
    const uint32_t s = (old_tail + k) & mask_;
    const Descriptor& d = slots_[s];
    if (((s - head) & mask_) < nic_owned) {
      violate(s, "is still NIC-owned (tail moved over a gap or backward)");
    }
    if (d.fill_count.load(std::memory_order_acquire) !=
        d.release_count.load(std::memory_order_relaxed) + 1) {
      violate(s, "was not filled exactly once since its last release");
    }
    if (d.dd.load(std::memory_order_acquire)) {
      violate(s, "still has DD set");
    }
    const BufferHandle cur = d.buf.load(std::memory_order_relaxed);
    if (cur == kInvalidHandle || cur == d.last_filled.load(std::memory_order_relaxed)) {
      violate(s, "was released without a replacement buffer");
    }
  }
  for (uint32_t k = 1; k <= dist; ++k) {
    slots_[(old_tail + k) & mask_].release_count.fetch_add(1, std::memory_order_relaxed);
  }
  released_.fetch_add(dist, std::memory_order_relaxed);
  tail_register_.store(new_tail, std::memory_order_release);
}

NicRing::Snapshot NicRing::snapshot() const {
  return Snapshot{head_.load(std::memory_order_acquire),
                  tail_register_.load(std::memory_order_acquire),
                  dropped_.load(std::memory_order_acquire)};
}

uint32_t NicRing::free_slots() const {
  const uint32_t head = head_.load(std::memory_order_acquire);
  const uint32_t tail = tail_register_.load(std::memory_order_acquire);
  return (tail - head) & mask_;
}

}  // namespace corec
