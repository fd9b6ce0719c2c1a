#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medledger/bytes.hpp"

namespace medledger::mpa {

/// Arbitrary-precision unsigned integer.
///
/// Limbs are 64-bit words stored least significant first. The representation
/// is canonical: there are never trailing zero limbs, and zero is the empty
/// limb sequence. Every constructor and operation re-establishes this, so
/// limb-wise equality is numeric equality.
class Natural {
 public:
  using Limb = std::uint64_t;
  static constexpr std::size_t kLimbBits = 64;

  Natural() = default;
  Natural(std::uint64_t value);  // NOLINT(google-explicit-constructor)

  static Natural from_limbs(std::vector<Limb> limbs);
  static Natural from_decimal(std::string_view digits);
  /// Big-endian hex, optional "0x" prefix.
  static Natural from_hex(std::string_view digits);
  static Natural from_bytes_be(ByteView bytes);
  /// 2^exponent
  static Natural power_of_two(std::size_t exponent);

  std::string to_decimal() const;
  /// Lowercase big-endian hex without prefix; "0" for zero.
  std::string to_hex() const;
  /// Minimal big-endian encoding (empty for zero), left-padded with zero
  /// bytes to `width` when given. Throws InvalidArgument if the value does
  /// not fit in `width` bytes.
  Bytes to_bytes_be(std::size_t width = 0) const;

  bool is_zero() const { return limbs_.empty(); }
  bool is_odd() const { return !limbs_.empty() && (limbs_[0] & 1U); }
  std::size_t bit_length() const;
  std::size_t byte_length() const { return (bit_length() + 7) / 8; }
  bool bit(std::size_t index) const;
  /// Low 64 bits.
  std::uint64_t low_u64() const { return limbs_.empty() ? 0 : limbs_[0]; }
  bool fits_u64() const { return limbs_.size() <= 1; }
  std::span<const Limb> limbs() const { return limbs_; }

  Natural& operator+=(const Natural& rhs);
  Natural& operator-=(const Natural& rhs);
  Natural& operator*=(const Natural& rhs);
  Natural& operator/=(const Natural& rhs);
  Natural& operator%=(const Natural& rhs);
  Natural& operator<<=(std::size_t bits);
  Natural& operator>>=(std::size_t bits);

  friend bool operator==(const Natural&, const Natural&) = default;
  friend std::strong_ordering operator<=>(const Natural& a, const Natural& b);

 private:
  void normalize();

  std::vector<Limb> limbs_;
};

struct DivRem {
  Natural quotient;
  Natural remainder;
};

Natural add(const Natural& a, const Natural& b);
/// Throws ArithmeticError when b > a.
Natural sub(const Natural& a, const Natural& b);
/// Schoolbook below a size threshold, Karatsuba above it.
Natural mul(const Natural& a, const Natural& b);
/// a = q*b + r with r < b. Throws ArithmeticError when b is zero.
DivRem div_rem(const Natural& a, const Natural& b);
/// a mod m for a single-word modulus; throws ArithmeticError on m == 0.
std::uint64_t mod_small(const Natural& a, std::uint64_t m);

/// Reference multiplication that never takes the Karatsuba path. Exposed for
/// cross-checking the fast path.
Natural mul_schoolbook(const Natural& a, const Natural& b);

inline Natural operator+(Natural a, const Natural& b) { return a += b; }
inline Natural operator-(Natural a, const Natural& b) { return a -= b; }
inline Natural operator*(const Natural& a, const Natural& b) { return mul(a, b); }
inline Natural operator/(const Natural& a, const Natural& b) { return div_rem(a, b).quotient; }
inline Natural operator%(const Natural& a, const Natural& b) { return div_rem(a, b).remainder; }
inline Natural operator<<(Natural a, std::size_t bits) { return a <<= bits; }
inline Natural operator>>(Natural a, std::size_t bits) { return a >>= bits; }

}  // namespace medledger::mpa
