#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "medledger/bytes.hpp"

namespace medledger::twofish {

inline constexpr std::size_t kBlockSize = 16;
inline constexpr std::size_t kRounds = 16;
inline constexpr std::size_t kSubkeyCount = 40;

using Block = std::array<std::uint8_t, kBlockSize>;

/// Raw key bytes, 16, 24 or 32 long.
class TwofishKey {
 public:
  /// Throws InvalidArgument unless the length is 16, 24 or 32.
  static TwofishKey from_bytes(ByteView bytes);
  /// Zero-pads keys shorter than 32 bytes up to the next legal size.
  static TwofishKey zero_padded(ByteView bytes);

  ByteView bytes() const { return bytes_; }
  std::size_t size() const { return bytes_.size(); }
  /// Number of 64-bit key words: 2, 3 or 4.
  std::size_t key_words() const { return bytes_.size() / 8; }

 private:
  explicit TwofishKey(Bytes bytes) : bytes_(std::move(bytes)) {}
  Bytes bytes_;
};

/// The 128-bit block as four little-endian 32-bit words.
struct BlockState {
  std::array<std::uint32_t, 4> words{};

  static BlockState load(const Block& block);
  Block store() const;
};

/// Expanded key: 40 round subkeys (K0-K7 whitening, K8-K39 rounds), the
/// k = keylen/64 S-box key words, and the key-dependent g tables derived
/// from them.
class KeySchedule {
 public:
  explicit KeySchedule(const TwofishKey& key);

  std::span<const std::uint32_t, kSubkeyCount> subkeys() const { return subkeys_; }
  /// S-box key words in the order g consumes them: (S_{k-1}, ..., S_0).
  std::span<const std::uint32_t> sbox_key_material() const { return sbox_words_; }

  /// Table-driven g; equals g_function(x, sbox_key_material()).
  std::uint32_t g(std::uint32_t x) const {
    return sbox_[0][x & 0xff] ^ sbox_[1][(x >> 8) & 0xff] ^ sbox_[2][(x >> 16) & 0xff] ^ sbox_[3][x >> 24];
  }

  friend bool operator==(const KeySchedule& a, const KeySchedule& b) {
    return a.subkeys_ == b.subkeys_ && a.sbox_words_ == b.sbox_words_;
  }

 private:
  std::array<std::uint32_t, kSubkeyCount> subkeys_{};
  std::vector<std::uint32_t> sbox_words_;
  std::array<std::array<std::uint32_t, 256>, 4> sbox_{};
};

/// Pseudo-Hadamard transform: (p + q, p + 2q) mod 2^32.
constexpr std::pair<std::uint32_t, std::uint32_t> pht(std::uint32_t p, std::uint32_t q) {
  return {p + q, p + 2 * q};
}

/// Fixed 8-bit permutations q0 (which == 0) and q1 (which == 1).
std::uint8_t q_permute(int which, std::uint8_t x);

/// Multiplication of a byte column by the MDS matrix over GF(2^8)
/// (primitive polynomial x^8 + x^6 + x^5 + x^3 + 1).
std::uint32_t mds_multiply(std::uint32_t column);

/// h: key-dependent q-permutation ladder on each byte of x, then MDS.
/// `key_material` holds k = 2, 3 or 4 words L0..L(k-1).
std::uint32_t h_function(std::uint32_t x, std::span<const std::uint32_t> key_material);

/// g(x) = h(x, S) computed directly from the S-box key words, without the
/// precomputed tables KeySchedule::g uses.
std::uint32_t g_function(std::uint32_t x, std::span<const std::uint32_t> sbox_key_material);

Block encrypt_block(const KeySchedule& ks, const Block& plaintext);
Block decrypt_block(const KeySchedule& ks, const Block& ciphertext);

}  // namespace medledger::twofish
