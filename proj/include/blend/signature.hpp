#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace blend {

// Fixed signature format: 128 bits, 3 hash positions per value. The seed
// constants are part of the on-disk format and must never change without
// bumping the index format version.
inline constexpr int kSignatureBits = 128;
inline constexpr int kSignatureHashes = 3;
inline constexpr std::uint64_t kSignatureSeeds[kSignatureHashes] = {
    0x9e3779b97f4a7c15ULL,
    0xc2b2ae3d27d4eb4fULL,
    0x165667b19e3779f9ULL,
};

// 128-bit bitset used for per-value signatures and per-row super keys.
struct Signature {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  void set_bit(unsigned pos) {
    if (pos < 64) {
      lo |= std::uint64_t{1} << pos;
    } else {
      hi |= std::uint64_t{1} << (pos - 64);
    }
  }

  Signature& operator|=(const Signature& other) {
    hi |= other.hi;
    lo |= other.lo;
    return *this;
  }

  friend Signature operator|(Signature a, const Signature& b) { return a |= b; }
  friend bool operator==(const Signature& a, const Signature& b) = default;

  bool empty() const { return hi == 0 && lo == 0; }
  int popcount() const;

  // 32 lowercase hex digits, most significant first.
  std::string to_hex() const;
  static std::optional<Signature> from_hex(std::string_view hex);
};

// Seeded 64-bit hash over bytes (FNV-1a folded through a splitmix64
// finalizer). Stable across platforms and builds.
std::uint64_t hash64(std::string_view data, std::uint64_t seed);

// Signature of one normalized cell value: the bits
// {hash64(value, seed_i) mod 128 : i in 0..2}. At most 3 bits set.
Signature cell_signature(std::string_view normalized_value);

// true iff every bit of `query` is set in `candidate`.
inline bool subsumes(const Signature& query, const Signature& candidate) {
  return (query.hi & candidate.hi) == query.hi &&
         (query.lo & candidate.lo) == query.lo;
}

}  // namespace blend
