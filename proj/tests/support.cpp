#include "support.hpp"

#include <algorithm>
#include <thread>

namespace corec::test {

AbaOutcome run_aba_scenario(ClaimKey key) {
  AbaOutcome outcome;
  Mempool pool(16);
  NicRing ring(4, pool);
  SharedRxQueue queue(ring, pool, 2, 0, key);

  HookGate gate;
  gate.arm(0, HookPoint::kBeforeClaimCas);
  queue.set_hook(gate.hook());

  auto fill2 = [&](uint64_t first_seq) {
    require(ring.fill(make_packets(first_seq, 2)) == 2, "fill of 2 must install 2");
  };

  std::vector<BufferHandle> out_b(2);
  std::vector<BufferHandle> held;
  auto stepped_rx_hold = [&] {
    const uint32_t n = queue.rx_batch({out_b.data(), 2}, 1);
    require(n == 2, "stepping consumer must win its batch of 2");
    for (uint32_t j = 0; j < n; ++j) {
      outcome.stepped_delivered.push_back(pool.packet(out_b[j]).seq);
      held.push_back(out_b[j]);
    }
  };
  auto free_held = [&] {
    pool.bulk_free(held);
    held.clear();
  };

  fill2(0);          // P0,P1 -> slots 0,1
  stepped_rx_hold();  // B claims [0,2); delivered buffers stay out of the pool
  fill2(2);          // P2,P3 -> slots 2,3

  // A loads the counter at 2, scans slots 2,3, reserves replacements, parks.
  std::vector<BufferHandle> out_a(2);
  std::thread parked([&] {
    try {
      outcome.parked_returned = queue.rx_batch({out_a.data(), 2}, 0);
    } catch (const TransparencyViolation&) {
      outcome.parked_saw_violation = true;
    }
  });
  gate.wait_parked();

  free_held();        // the P0/P1 buffers go back on top of the free list
  stepped_rx_hold();  // B claims [2,4): its replacements are those stale buffers
  free_held();
  fill2(4);          // P4,P5 -> slots 0,1
  stepped_rx_hold();  // B claims [4,6): raw counter is back at A's loaded value
  free_held();

  gate.release_all();  // A fires its CAS against a full-revolution-later queue
  parked.join();

  const uint32_t copied =
      gate.copies(0).empty() ? 0 : gate.copies(0).back().second;
  const uint32_t got = std::max(outcome.parked_returned, copied);
  for (uint32_t j = 0; j < got; ++j) {
    outcome.parked_delivered.push_back(pool.packet(out_a[j]).seq);
  }
  outcome.violations = ring.transparency_violations();
  outcome.final_rx_index = queue.rx_index();
  return outcome;
}

}  // namespace corec::test
