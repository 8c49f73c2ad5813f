#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "corec/mempool.hpp"
#include "corec/nic_ring.hpp"

namespace corec {

// Classic single-consumer receive: scan DD bits up to the batch size, copy
// each filled descriptor out, replace it from the pool one at a time, and
// write the tail to the last processed slot. Exactly one thread per queue.
class BaselineQueue {
 public:
  BaselineQueue(NicRing& ring, Mempool& pool, uint32_t batch_size = 32);

  uint32_t rx_batch_single(std::span<BufferHandle> out);

  uint32_t rx_index() const { return rx_index_; }
  NicRing& ring() { return ring_; }

 private:
  NicRing& ring_;
  Mempool& pool_;
  uint32_t batch_size_;
  uint32_t mask_;
  uint32_t rx_index_;  // plain slot index; single consumer, no ABA exposure
};

// Stable flow -> queue mapping for the scale-out comparator.
unsigned dispatch_flow(uint32_t flow_id, unsigned n_queues);

// N independent ring+pool+queue triples, one consumer thread each, fed
// through dispatch_flow. This is the state-of-the-art topology corec is
// measured against.
class ScaleOutTopology {
 public:
  ScaleOutTopology(unsigned n_queues, uint32_t ring_size, uint32_t batch_size,
                   uint32_t pool_capacity_per_queue = 0);

  unsigned size() const { return static_cast<unsigned>(lanes_.size()); }
  unsigned dispatch(uint32_t flow_id) const { return dispatch_flow(flow_id, size()); }

  NicRing& ring(unsigned i) { return lanes_[i]->ring; }
  BaselineQueue& queue(unsigned i) { return lanes_[i]->queue; }
  Mempool& pool(unsigned i) { return lanes_[i]->pool; }

 private:
  struct Lane {
    Lane(uint32_t ring_size, uint32_t batch_size, uint32_t pool_capacity)
        : pool(pool_capacity), ring(ring_size, pool), queue(ring, pool, batch_size) {}
    Mempool pool;
    NicRing ring;
    BaselineQueue queue;
  };
  std::vector<std::unique_ptr<Lane>> lanes_;
};

}  // namespace corec
