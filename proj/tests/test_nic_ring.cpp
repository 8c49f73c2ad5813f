#include <vector>

#include "corec/baseline.hpp"
#include "corec/mempool.hpp"
#include "corec/nic_ring.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace corec;
using namespace corec::test;

namespace {

// Emulates one consumer step outside the rx algorithms: copy out, re-arm,
// clear dd. Returns the taken buffer.
BufferHandle consume_slot(NicRing& ring, Mempool& pool, uint32_t slot) {
  Descriptor& d = ring.slot(slot);
  REQUIRE(d.dd.load());
  const BufferHandle taken = d.buf.load();
  d.buf.store(pool.alloc());
  d.dd.store(false);
  return taken;
}

}  // namespace

TEST_CASE("fresh ring snapshot matches the one-reserved-slot convention") {
  Mempool pool(64);
  NicRing ring(16, pool);
  const auto snap = ring.snapshot();
  CHECK(snap.head == 0);
  CHECK(snap.tail_register == 15);
  CHECK(snap.dropped == 0);
  CHECK(ring.free_slots() == 15);
}

TEST_CASE("fill installs packets and advances head") {
  Mempool pool(64);
  NicRing ring(16, pool);
  const auto pkts = make_packets(0, 3);
  CHECK(ring.fill(pkts) == 3);
  CHECK(ring.snapshot().head == 3);
  CHECK(ring.installed_count() == 3);
  for (uint32_t s = 0; s < 3; ++s) {
    CHECK(ring.slot(s).dd.load());
    CHECK(pool.packet(ring.slot(s).buf.load()).seq == s);
  }
  CHECK_FALSE(ring.slot(3).dd.load());
}

TEST_CASE("fill on a full ring drops and counts") {
  Mempool pool(64);
  NicRing ring(8, pool);
  CHECK(ring.fill(make_packets(0, 7)) == 7);  // head == tail_register now
  CHECK(ring.snapshot().head == ring.snapshot().tail_register);
  CHECK(ring.fill_one(make_packet(7)) == 0);
  CHECK(ring.snapshot().dropped == 1);
}

TEST_CASE("partial fill installs exactly the free-slot count") {
  Mempool pool(64);
  NicRing ring(8, pool);
  REQUIRE(ring.fill(make_packets(0, 5)) == 5);
  // Circular-distance oracle for the remaining space.
  const auto snap = ring.snapshot();
  const uint32_t free = circular_distance(snap.head, snap.tail_register, 8);
  CHECK(free == 2);
  CHECK(ring.fill(make_packets(5, 5)) == 2);
  CHECK(ring.snapshot().dropped == 3);
}

TEST_CASE("contiguous tail write is accepted") {
  Mempool pool(64);
  NicRing ring(8, pool);
  ring.fill(make_packets(0, 3));
  for (uint32_t s = 0; s < 3; ++s) consume_slot(ring, pool, s);
  ring.observe_tail_write(2);  // slots (7, 2] == {0,1,2}
  CHECK(ring.snapshot().tail_register == 2);
  CHECK(ring.released_count() == 3);
  CHECK(ring.transparency_violations() == 0);
}

TEST_CASE("tail write equal to the current tail is a no-op") {
  Mempool pool(64);
  NicRing ring(8, pool);
  ring.observe_tail_write(7);
  CHECK(ring.snapshot().tail_register == 7);
  CHECK(ring.released_count() == 0);
}

TEST_CASE("tail write over an unprocessed slot is a violation") {
  Mempool pool(64);
  NicRing ring(8, pool);
  ring.fill(make_packets(0, 3));
  consume_slot(ring, pool, 0);
  // Slot 1 still has dd set; releasing through slot 1 frees it under the NIC.
  CHECK_THROWS_AS(ring.observe_tail_write(1), TransparencyViolation);
  CHECK(ring.transparency_violations() == 1);
}

TEST_CASE("tail write over a gap (copied but skipped slot) is a violation") {
  Mempool pool(64);
  NicRing ring(8, pool);
  ring.fill(make_packets(0, 3));
  consume_slot(ring, pool, 0);
  consume_slot(ring, pool, 2);  // slot 1 untouched: dd still set
  CHECK_THROWS_AS(ring.observe_tail_write(2), TransparencyViolation);
}

TEST_CASE("tail write without a replacement buffer is a violation") {
  Mempool pool(64);
  NicRing ring(8, pool);
  ring.fill(make_packets(0, 1));
  Descriptor& d = ring.slot(0);
  d.dd.store(false);  // copied... but never re-armed
  CHECK_THROWS_AS(ring.observe_tail_write(0), TransparencyViolation);
}

TEST_CASE("tail write into the NIC-owned region is a violation") {
  Mempool pool(64);
  NicRing ring(8, pool);
  ring.fill(make_packets(0, 2));
  consume_slot(ring, pool, 0);
  consume_slot(ring, pool, 1);
  // Slots 2.. are NIC-owned and never filled: any tail past them must throw.
  CHECK_THROWS_AS(ring.observe_tail_write(4), TransparencyViolation);
}

TEST_CASE("released slots can be filled again across epochs") {
  Mempool pool(64);
  NicRing ring(4, pool);
  uint64_t seq = 0;
  for (int round = 0; round < 10; ++round) {
    const uint32_t n = ring.fill(make_packets(seq, 3));
    CHECK(n == 3);
    const auto snap = ring.snapshot();
    uint32_t slot = (snap.tail_register + 1) & ring.mask();
    std::vector<BufferHandle> taken;
    for (uint32_t i = 0; i < n; ++i) {
      taken.push_back(consume_slot(ring, pool, slot));
      slot = (slot + 1) & ring.mask();
    }
    ring.observe_tail_write((snap.tail_register + n) & ring.mask());
    pool.bulk_free(taken);
    seq += n;
  }
  CHECK(ring.installed_count() == 30);
  CHECK(ring.released_count() == 30);
  CHECK(ring.transparency_violations() == 0);
}

TEST_CASE("publication: dd set implies the packet is fully visible") {
  // Single-threaded spot check of the ordering contract; the threaded stress
  // in the rx_queue and harness tests exercises it concurrently.
  Mempool pool(16);
  NicRing ring(4, pool);
  Packet p = make_packet(7, 3, 1500, 12345);
  ring.fill_one(p);
  REQUIRE(ring.slot(0).dd.load(std::memory_order_acquire));
  const Packet& seen = pool.packet(ring.slot(0).buf.load());
  CHECK(seen.seq == 7);
  CHECK(seen.flow_id == 3);
  CHECK(seen.size_bytes == 1500);
  CHECK(seen.t_inject == 12345);
}

TEST_CASE("ring size must be a power of two") {
  Mempool pool(64);
  CHECK_THROWS_AS(NicRing(12, pool), NotPowerOfTwo);
}
