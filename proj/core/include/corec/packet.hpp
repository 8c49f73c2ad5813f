#pragma once

#include <cstdint>

namespace corec {

// Index into a Mempool's buffer storage.
using BufferHandle = uint32_t;
inline constexpr BufferHandle kInvalidHandle = 0xFFFFFFFFu;

// Payload stand-in for one received frame. seq is unique per run and is what
// the exactly-once and reordering checks key on. Timestamps are nanoseconds,
// simulated or wall-clock depending on the run mode; t_deliver < 0 means the
// packet has not been handed to the application yet.
struct Packet {
  uint64_t seq = 0;
  uint32_t flow_id = 0;
  uint32_t size_bytes = 64;
  int64_t t_inject = 0;
  int64_t t_deliver = -1;

  bool delivered() const { return t_deliver >= 0; }
};

}  // namespace corec
