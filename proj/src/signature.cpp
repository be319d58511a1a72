#include "blend/signature.hpp"

#include <bit>

namespace blend {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr char kHexDigits[] = "0123456789abcdef";

void append_hex64(std::string& out, std::uint64_t word) {
  for (int shift = 60; shift >= 0; shift -= 4)
    out += kHexDigits[(word >> shift) & 0xf];
}

}  // namespace

std::uint64_t hash64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

Signature cell_signature(std::string_view normalized_value) {
  Signature sig;
  for (std::uint64_t seed : kSignatureSeeds)
    sig.set_bit(static_cast<unsigned>(hash64(normalized_value, seed) %
                                      kSignatureBits));
  return sig;
}

int Signature::popcount() const {
  return std::popcount(hi) + std::popcount(lo);
}

std::string Signature::to_hex() const {
  std::string out;
  out.reserve(32);
  append_hex64(out, hi);
  append_hex64(out, lo);
  return out;
}

std::optional<Signature> Signature::from_hex(std::string_view hex) {
  if (hex.size() != 32) return std::nullopt;
  Signature sig;
  for (int i = 0; i < 32; ++i) {
    char c = hex[i];
    std::uint64_t nibble;
    if (c >= '0' && c <= '9') {
      nibble = static_cast<std::uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      nibble = static_cast<std::uint64_t>(c - 'a' + 10);
    } else {
      return std::nullopt;
    }
    auto& word = i < 16 ? sig.hi : sig.lo;
    word = (word << 4) | nibble;
  }
  return sig;
}

}  // namespace blend
