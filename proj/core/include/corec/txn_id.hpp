#pragma once

#include <cstdint>

#include "corec/errors.hpp"

namespace corec {

// Ever-growing 32-bit transaction ID. It wraps at 2^32; because the ring size
// is a power of two, slot(id) = id mod ring_size stays correct across the
// wrap, and the quotient (the epoch) distinguishes ring revolutions so a
// stale CAS cannot succeed on a value the counter has returned to.
using TxnId = uint32_t;

constexpr bool is_power_of_two(uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

struct SlotEpoch {
  uint32_t slot;
  uint32_t epoch;
};

// Maps an ID to (descriptor index, epoch). Throws NotPowerOfTwo for ring
// sizes the mapping cannot support.
inline SlotEpoch id_to_slot(TxnId id, uint32_t ring_size) {
  if (!is_power_of_two(ring_size)) {
    throw NotPowerOfTwo("ring size must be a power of two, got " + std::to_string(ring_size));
  }
  return SlotEpoch{id & (ring_size - 1), id / ring_size};
}

// Unchecked slot mapping for hot paths; ring_size validated at construction.
constexpr uint32_t slot_of(TxnId id, uint32_t ring_size) { return id & (ring_size - 1); }

// Circular forward distance between two slot indices.
constexpr uint32_t circular_distance(uint32_t from, uint32_t to, uint32_t ring_size) {
  return (to - from) & (ring_size - 1);
}

}  // namespace corec
