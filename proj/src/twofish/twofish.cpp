#include "medledger/twofish/twofish.hpp"

#include <bit>
#include <tuple>

#include "medledger/errors.hpp"

namespace medledger::twofish {

namespace {

using Nibbles = std::array<std::uint8_t, 16>;

struct QTables {
  Nibbles t0, t1, t2, t3;
};

constexpr QTables kQ0Tables{
    {0x8, 0x1, 0x7, 0xD, 0x6, 0xF, 0x3, 0x2, 0x0, 0xB, 0x5, 0x9, 0xE, 0xC, 0xA, 0x4},
    {0xE, 0xC, 0xB, 0x8, 0x1, 0x2, 0x3, 0x5, 0xF, 0x4, 0xA, 0x6, 0x7, 0x0, 0x9, 0xD},
    {0xB, 0xA, 0x5, 0xE, 0x6, 0xD, 0x9, 0x0, 0xC, 0x8, 0xF, 0x3, 0x2, 0x4, 0x7, 0x1},
    {0xD, 0x7, 0xF, 0x4, 0x1, 0x2, 0x6, 0xE, 0x9, 0xB, 0x3, 0x0, 0x8, 0x5, 0xC, 0xA},
};

constexpr QTables kQ1Tables{
    {0x2, 0x8, 0xB, 0xD, 0xF, 0x7, 0x6, 0xE, 0x3, 0x1, 0x9, 0x4, 0x0, 0xA, 0xC, 0x5},
    {0x1, 0xE, 0x2, 0xB, 0x4, 0xC, 0x3, 0x7, 0x6, 0xD, 0xA, 0x5, 0xF, 0x9, 0x0, 0x8},
    {0x4, 0xC, 0x7, 0x5, 0x1, 0x6, 0x9, 0xA, 0x0, 0xE, 0xD, 0x8, 0x2, 0xB, 0x3, 0xF},
    {0xB, 0x9, 0x5, 0x1, 0xC, 0x3, 0xD, 0xE, 0x6, 0x4, 0x7, 0xF, 0x2, 0x0, 0x8, 0xA},
};

constexpr std::uint8_t ror4(std::uint8_t x) { return static_cast<std::uint8_t>(((x >> 1) | (x << 3)) & 0xF); }

constexpr std::uint8_t q_from_tables(const QTables& t, std::uint8_t x) {
  std::uint8_t a = x >> 4, b = x & 0xF;
  std::uint8_t a1 = a ^ b;
  std::uint8_t b1 = static_cast<std::uint8_t>(a ^ ror4(b) ^ ((8 * a) & 0xF));
  std::uint8_t a2 = t.t0[a1], b2 = t.t1[b1];
  std::uint8_t a3 = a2 ^ b2;
  std::uint8_t b3 = static_cast<std::uint8_t>(a2 ^ ror4(b2) ^ ((8 * a2) & 0xF));
  std::uint8_t a4 = t.t2[a3], b4 = t.t3[b3];
  return static_cast<std::uint8_t>((b4 << 4) | a4);
}

constexpr auto build_q(const QTables& t) {
  std::array<std::uint8_t, 256> q{};
  for (int x = 0; x < 256; ++x) q[x] = q_from_tables(t, static_cast<std::uint8_t>(x));
  return q;
}

constexpr auto kQ0 = build_q(kQ0Tables);
constexpr auto kQ1 = build_q(kQ1Tables);

constexpr std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b, unsigned poly) {
  unsigned acc = 0, x = a;
  for (; b; b >>= 1) {
    if (b & 1) acc ^= x;
    x <<= 1;
    if (x & 0x100) x ^= poly;
  }
  return static_cast<std::uint8_t>(acc);
}

constexpr unsigned kMdsPoly = 0x169;  // x^8 + x^6 + x^5 + x^3 + 1
constexpr unsigned kRsPoly = 0x14D;   // x^8 + x^6 + x^3 + x^2 + 1
constexpr std::uint32_t kRho = 0x01010101;

constexpr std::uint8_t kMds[4][4] = {
    {0x01, 0xEF, 0x5B, 0x5B},
    {0x5B, 0xEF, 0xEF, 0x01},
    {0xEF, 0x5B, 0x01, 0xEF},
    {0xEF, 0x01, 0xEF, 0x5B},
};

constexpr std::uint8_t kRs[4][8] = {
    {0x01, 0xA4, 0x55, 0x87, 0x5A, 0x58, 0xDB, 0x9E},
    {0xA4, 0x56, 0x82, 0xF3, 0x1E, 0xC6, 0x68, 0xE5},
    {0x02, 0xA1, 0xFC, 0xC1, 0x47, 0xAE, 0x3D, 0x19},
    {0xA4, 0x55, 0x87, 0x5A, 0x58, 0xDB, 0x9E, 0x03},
};

constexpr std::uint8_t byte_of(std::uint32_t w, int i) { return static_cast<std::uint8_t>(w >> (8 * i)); }

std::uint32_t load_le(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

// Which q each byte position passes through at each stage of h, from the
// outermost (key word 3) stage inward.
//   k = 4 stage: q1 q0 q0 q1     k >= 3 stage: q1 q1 q0 q0
//   then q0 q1 q0 q1 ^ L1, q0 q0 q1 q1 ^ L0, and finally q1 q0 q1 q0.
std::uint8_t permute_byte(std::uint8_t y, int pos, std::span<const std::uint32_t> L) {
  static constexpr int kStage3[4] = {1, 0, 0, 1};
  static constexpr int kStage2[4] = {1, 1, 0, 0};
  static constexpr int kStage1[4] = {0, 1, 0, 1};
  static constexpr int kStage0[4] = {0, 0, 1, 1};
  static constexpr int kFinal[4] = {1, 0, 1, 0};
  const std::size_t k = L.size();
  if (k == 4) y = q_permute(kStage3[pos], y) ^ byte_of(L[3], pos);
  if (k >= 3) y = q_permute(kStage2[pos], y) ^ byte_of(L[2], pos);
  y = q_permute(kStage1[pos], y) ^ byte_of(L[1], pos);
  y = q_permute(kStage0[pos], y) ^ byte_of(L[0], pos);
  return q_permute(kFinal[pos], y);
}

std::uint32_t mds_column(int col, std::uint8_t v) {
  std::uint32_t out = 0;
  for (int row = 0; row < 4; ++row) out |= std::uint32_t(gf_mul(kMds[row][col], v, kMdsPoly)) << (8 * row);
  return out;
}

}  // namespace

TwofishKey TwofishKey::from_bytes(ByteView bytes) {
  if (bytes.size() != 16 && bytes.size() != 24 && bytes.size() != 32) {
    throw InvalidArgument("Twofish key must be 16, 24 or 32 bytes, got " + std::to_string(bytes.size()));
  }
  return TwofishKey(Bytes(bytes.begin(), bytes.end()));
}

TwofishKey TwofishKey::zero_padded(ByteView bytes) {
  if (bytes.size() > 32) throw InvalidArgument("Twofish key longer than 32 bytes");
  std::size_t size = bytes.size() <= 16 ? 16 : bytes.size() <= 24 ? 24 : 32;
  Bytes padded(bytes.begin(), bytes.end());
  padded.resize(size, 0);
  return TwofishKey(std::move(padded));
}

BlockState BlockState::load(const Block& block) {
  BlockState s;
  for (int i = 0; i < 4; ++i) s.words[i] = load_le(block.data() + 4 * i);
  return s;
}

Block BlockState::store() const {
  Block out{};
  for (int i = 0; i < 4; ++i) {
    for (int b = 0; b < 4; ++b) out[4 * i + b] = byte_of(words[i], b);
  }
  return out;
}

std::uint8_t q_permute(int which, std::uint8_t x) { return which == 0 ? kQ0[x] : kQ1[x]; }

std::uint32_t mds_multiply(std::uint32_t column) {
  std::uint32_t out = 0;
  for (int col = 0; col < 4; ++col) out ^= mds_column(col, byte_of(column, col));
  return out;
}

std::uint32_t h_function(std::uint32_t x, std::span<const std::uint32_t> key_material) {
  if (key_material.size() < 2 || key_material.size() > 4) throw InvalidArgument("h needs 2 to 4 key words");
  std::uint32_t y = 0;
  for (int pos = 0; pos < 4; ++pos) y |= std::uint32_t(permute_byte(byte_of(x, pos), pos, key_material)) << (8 * pos);
  return mds_multiply(y);
}

std::uint32_t g_function(std::uint32_t x, std::span<const std::uint32_t> sbox_key_material) {
  return h_function(x, sbox_key_material);
}

KeySchedule::KeySchedule(const TwofishKey& key) {
  const std::size_t k = key.key_words();
  const ByteView m = key.bytes();

  std::vector<std::uint32_t> even(k), odd(k);
  for (std::size_t i = 0; i < k; ++i) {
    even[i] = load_le(m.data() + 8 * i);
    odd[i] = load_le(m.data() + 8 * i + 4);
  }

  // S_i = RS * (m[8i..8i+7]); g takes them in reverse order.
  sbox_words_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::uint32_t s = 0;
    for (int row = 0; row < 4; ++row) {
      std::uint8_t acc = 0;
      for (int col = 0; col < 8; ++col) acc ^= gf_mul(kRs[row][col], m[8 * i + col], kRsPoly);
      s |= std::uint32_t(acc) << (8 * row);
    }
    sbox_words_[k - 1 - i] = s;
  }

  for (std::uint32_t i = 0; i < kSubkeyCount / 2; ++i) {
    std::uint32_t a = h_function(2 * i * kRho, even);
    std::uint32_t b = std::rotl(h_function((2 * i + 1) * kRho, odd), 8);
    auto [k0, k1] = pht(a, b);
    subkeys_[2 * i] = k0;
    subkeys_[2 * i + 1] = std::rotl(k1, 9);
  }

  for (int pos = 0; pos < 4; ++pos) {
    for (int x = 0; x < 256; ++x) {
      sbox_[pos][x] = mds_column(pos, permute_byte(static_cast<std::uint8_t>(x), pos, sbox_words_));
    }
  }
}

Block encrypt_block(const KeySchedule& ks, const Block& plaintext) {
  const auto K = ks.subkeys();
  auto [a, b, c, d] = BlockState::load(plaintext).words;
  a ^= K[0];
  b ^= K[1];
  c ^= K[2];
  d ^= K[3];

  // Two rounds per iteration so the word roles swap back without copies.
  for (std::size_t r = 0; r < kRounds; r += 2) {
    auto [x, y] = pht(ks.g(a), ks.g(std::rotl(b, 8)));
    x += K[2 * r + 8];
    y += K[2 * r + 9];
    c = std::rotr(c ^ x, 1);
    d = std::rotl(d, 1) ^ y;

    std::tie(x, y) = pht(ks.g(c), ks.g(std::rotl(d, 8)));
    x += K[2 * r + 10];
    y += K[2 * r + 11];
    a = std::rotr(a ^ x, 1);
    b = std::rotl(b, 1) ^ y;
  }

  // Undo the last swap, then output whitening.
  return BlockState{{c ^ K[4], d ^ K[5], a ^ K[6], b ^ K[7]}}.store();
}

Block decrypt_block(const KeySchedule& ks, const Block& ciphertext) {
  const auto K = ks.subkeys();
  auto [c, d, a, b] = BlockState::load(ciphertext).words;
  c ^= K[4];
  d ^= K[5];
  a ^= K[6];
  b ^= K[7];

  for (std::size_t r = kRounds; r > 0; r -= 2) {
    auto [x, y] = pht(ks.g(c), ks.g(std::rotl(d, 8)));
    x += K[2 * r + 6];
    y += K[2 * r + 7];
    a = std::rotl(a, 1) ^ x;
    b = std::rotr(b ^ y, 1);

    std::tie(x, y) = pht(ks.g(a), ks.g(std::rotl(b, 8)));
    x += K[2 * r + 4];
    y += K[2 * r + 5];
    c = std::rotl(c, 1) ^ x;
    d = std::rotr(d ^ y, 1);
  }

  return BlockState{{a ^ K[0], b ^ K[1], c ^ K[2], d ^ K[3]}}.store();
}

}  // namespace medledger::twofish
