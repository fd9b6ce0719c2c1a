#include "medledger/mpa/rng.hpp"

#include <bit>
#include <random>

#include "medledger/errors.hpp"

namespace medledger::mpa {

namespace {

inline void quarter_round(std::array<std::uint32_t, 16>& x, int a, int b, int c, int d) {
  x[a] += x[b]; x[d] = std::rotl(x[d] ^ x[a], 16);
  x[c] += x[d]; x[b] = std::rotl(x[b] ^ x[c], 12);
  x[a] += x[b]; x[d] = std::rotl(x[d] ^ x[a], 8);
  x[c] += x[d]; x[b] = std::rotl(x[b] ^ x[c], 7);
}

}  // namespace

std::array<std::uint8_t, 64> chacha20_block(const std::array<std::uint32_t, 8>& key, std::uint32_t counter,
                                            const std::array<std::uint32_t, 3>& nonce) {
  std::array<std::uint32_t, 16> state{0x61707865, 0x3320646e, 0x79622d32, 0x6b206574};
  for (int i = 0; i < 8; ++i) state[4 + i] = key[i];
  state[12] = counter;
  for (int i = 0; i < 3; ++i) state[13 + i] = nonce[i];

  auto x = state;
  for (int i = 0; i < 10; ++i) {
    quarter_round(x, 0, 4, 8, 12);
    quarter_round(x, 1, 5, 9, 13);
    quarter_round(x, 2, 6, 10, 14);
    quarter_round(x, 3, 7, 11, 15);
    quarter_round(x, 0, 5, 10, 15);
    quarter_round(x, 1, 6, 11, 12);
    quarter_round(x, 2, 7, 8, 13);
    quarter_round(x, 3, 4, 9, 14);
  }
  std::array<std::uint8_t, 64> out{};
  for (int i = 0; i < 16; ++i) {
    std::uint32_t w = x[i] + state[i];
    for (int b = 0; b < 4; ++b) out[4 * i + b] = static_cast<std::uint8_t>(w >> (8 * b));
  }
  return out;
}

Rng::Rng(const Seed& seed) {
  for (int i = 0; i < 8; ++i) {
    key_[i] = std::uint32_t(seed[4 * i]) | std::uint32_t(seed[4 * i + 1]) << 8 |
              std::uint32_t(seed[4 * i + 2]) << 16 | std::uint32_t(seed[4 * i + 3]) << 24;
  }
  for (int i = 7; i >= 0; --i) seed_id_ = (seed_id_ << 8) | seed[i];
}

Rng Rng::from_u64(std::uint64_t seed) {
  Seed s{};
  for (int i = 0; i < 8; ++i) s[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  return Rng(s);
}

Rng Rng::from_entropy() {
  std::random_device rd;
  Seed s{};
  for (std::size_t i = 0; i < s.size(); i += 4) {
    std::uint32_t v = rd();
    for (int b = 0; b < 4; ++b) s[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return Rng(s);
}

void Rng::refill() {
  // Low counter word in the RFC counter slot, high word in the first nonce slot.
  block_ = chacha20_block(key_, static_cast<std::uint32_t>(counter_),
                          {static_cast<std::uint32_t>(counter_ >> 32), 0, 0});
  ++counter_;
  used_ = 0;
}

void Rng::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) {
    if (used_ == block_.size()) refill();
    b = block_[used_++];
  }
}

std::uint64_t Rng::next_u64() {
  std::array<std::uint8_t, 8> buf{};
  fill(buf);
  std::uint64_t v = 0;
  for (auto b : buf) v = (v << 8) | b;
  return v;
}

std::uint64_t Rng::uniform_u64(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("uniform_u64 bound must be nonzero");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

Natural Rng::random_bits(std::size_t bits) {
  if (bits == 0) return {};
  Bytes buf((bits + 7) / 8);
  fill(buf);
  const std::size_t excess = buf.size() * 8 - bits;
  buf[0] &= static_cast<std::uint8_t>(0xff >> excess);
  return Natural::from_bytes_be(buf);
}

Natural Rng::uniform_between(const Natural& low, const Natural& high) {
  if (high < low) throw InvalidArgument("uniform_between: empty range");
  const Natural span = sub(high, low);
  const std::size_t bits = span.bit_length();
  for (;;) {
    Natural v = random_bits(bits);
    if (v <= span) return add(low, v);
  }
}

Rng Rng::fork() {
  Seed s{};
  fill(s);
  return Rng(s);
}

}  // namespace medledger::mpa
