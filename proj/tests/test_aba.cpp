// The wrap-around race: a consumer that loaded the claim counter, slept
// through a full ring revolution, and woke up must not be able to claim with
// its stale value. The monotonic transaction ID guarantees that; the raw
// slot-index variant demonstrates the failure it exists to prevent.

#include <algorithm>

#include "corec/rx_queue.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace corec;
using namespace corec::test;

TEST_CASE("epoch-bearing ID: the stale CAS fails after a full wrap") {
  const AbaOutcome o = run_aba_scenario(ClaimKey::kMonotonicId);
  CHECK(o.parked_returned == 0);
  CHECK(o.parked_delivered.empty());
  CHECK_FALSE(o.parked_saw_violation);
  CHECK(o.violations == 0);
  CHECK(o.final_rx_index == 6);  // 6 ids claimed, all by the stepping thread
  CHECK(o.stepped_delivered == std::vector<uint64_t>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("raw slot index: the stale CAS succeeds and delivers duplicates") {
  const AbaOutcome o = run_aba_scenario(ClaimKey::kRawSlotIndex);
  CHECK(o.stepped_delivered == std::vector<uint64_t>{0, 1, 2, 3, 4, 5});
  // The woken thread claimed slots holding recycled, already-delivered data.
  REQUIRE(o.parked_delivered.size() == 2);
  for (uint64_t seq : o.parked_delivered) {
    CHECK(std::count(o.stepped_delivered.begin(), o.stepped_delivered.end(), seq) == 1);
  }
  // Downstream the corruption is also visible to the transparency checker.
  CHECK(o.parked_saw_violation);
  CHECK(o.violations > 0);
}
