#include <doctest.h>

#include <set>

#include "coprompt/rng.hpp"

using coprompt::Rng;
using coprompt::mix_seed;

TEST_CASE("same seed reproduces the stream bit for bit") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  Rng a(1);
  Rng b(2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    if (a.next_u64() == b.next_u64()) ++equal;
  }
  CHECK(equal == 0);
}

TEST_CASE("next_double stays in [0, 1)") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("next_below respects the bound and hits every value") {
  Rng rng(3);
  std::set<uint32_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const uint32_t v = rng.next_below(5);
    CHECK(v < 5);
    seen.insert(v);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("children derive from the seed, not the consumed state") {
  Rng parent(99);
  parent.next_u64();
  parent.next_u64();
  Rng child_late = parent.child(1);
  Rng child_early = Rng(99).child(1);
  for (int i = 0; i < 100; ++i) {
    CHECK(child_late.next_u64() == child_early.next_u64());
  }
}

TEST_CASE("mix_seed separates tags") {
  const uint64_t base = 1234;
  std::set<uint64_t> seeds;
  for (uint64_t tag = 0; tag < 100; ++tag) seeds.insert(mix_seed(base, tag));
  CHECK(seeds.size() == 100);
}
