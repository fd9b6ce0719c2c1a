#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "medledger/mpa/natural.hpp"

namespace medledger::mpa {

using Seed = std::array<std::uint8_t, 32>;

/// Deterministic random byte source: the ChaCha20 keystream under a 32-byte
/// seed. Same seed, same stream. Instances are single-owner and not
/// thread-safe; use fork() to hand an independent stream to another thread.
class Rng {
 public:
  explicit Rng(const Seed& seed);
  /// Seed whose first 8 bytes are `seed` little-endian, rest zero.
  static Rng from_u64(std::uint64_t seed);
  /// Seeded from std::random_device.
  static Rng from_entropy();

  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;
  Rng(Rng&&) = default;
  Rng& operator=(Rng&&) = default;

  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();
  /// Uniform in [0, bound); bound must be nonzero.
  std::uint64_t uniform_u64(std::uint64_t bound);
  /// Uniform natural with at most `bits` bits.
  Natural random_bits(std::size_t bits);
  /// Uniform in [low, high], rejection sampled. Requires low <= high.
  Natural uniform_between(const Natural& low, const Natural& high);
  /// New generator seeded from this stream.
  Rng fork();

  /// First 8 seed bytes, little-endian. Recorded as key provenance.
  std::uint64_t seed_id() const { return seed_id_; }

 private:
  void refill();

  std::array<std::uint32_t, 8> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 64> block_{};
  std::size_t used_ = 64;
  std::uint64_t seed_id_ = 0;
};

/// One ChaCha20 block (RFC 8439 layout: 32-bit counter, 96-bit nonce).
std::array<std::uint8_t, 64> chacha20_block(const std::array<std::uint32_t, 8>& key, std::uint32_t counter,
                                            const std::array<std::uint32_t, 3>& nonce);

}  // namespace medledger::mpa
