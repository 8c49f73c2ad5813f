#include "corec/baseline.hpp"

#include <algorithm>

namespace corec {

BaselineQueue::BaselineQueue(NicRing& ring, Mempool& pool, uint32_t batch_size)
    : ring_(ring),
      pool_(pool),
      batch_size_(batch_size),
      mask_(ring.mask()),
      rx_index_(ring.snapshot().head) {}

uint32_t BaselineQueue::rx_batch_single(std::span<BufferHandle> out) {
  const uint32_t limit = static_cast<uint32_t>(std::min<size_t>(batch_size_, out.size()));
  uint32_t idx = rx_index_;
  uint32_t last = idx;
  uint32_t n = 0;
  while (n < limit) {
    Descriptor& d = ring_.slot(idx);
    if (!d.dd.load(std::memory_order_acquire)) break;
    out[n] = d.buf.load(std::memory_order_relaxed);
    d.buf.store(pool_.alloc(), std::memory_order_relaxed);
    d.dd.store(false, std::memory_order_release);
    last = idx;
    idx = (idx + 1) & mask_;
    ++n;
  }
  if (n > 0) {
    ring_.observe_tail_write(last);
    rx_index_ = idx;
  }
  return n;
}

unsigned dispatch_flow(uint32_t flow_id, unsigned n_queues) {
  // Knuth multiplicative hash; only equal spread matters here.
  const uint64_t mixed = (static_cast<uint64_t>(flow_id) * 2654435761ull) >> 32;
  return static_cast<unsigned>(mixed % n_queues);
}

ScaleOutTopology::ScaleOutTopology(unsigned n_queues, uint32_t ring_size, uint32_t batch_size,
                                   uint32_t pool_capacity_per_queue) {
  const uint32_t pool_cap =
      pool_capacity_per_queue == 0 ? 4 * ring_size : pool_capacity_per_queue;
  lanes_.reserve(n_queues);
  for (unsigned i = 0; i < n_queues; ++i) {
    lanes_.push_back(std::make_unique<Lane>(ring_size, batch_size, pool_cap));
  }
}

}  // namespace corec
