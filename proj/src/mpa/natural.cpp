#include "medledger/mpa/natural.hpp"

#include <algorithm>
#include <bit>

#include "medledger/errors.hpp"

namespace medledger::mpa {

namespace {

using Limb = Natural::Limb;
using Wide = unsigned __int128;
using SignedWide = __int128;

// Below this many limbs in the shorter operand Karatsuba loses to schoolbook.
constexpr std::size_t kKaratsubaThreshold = 32;

constexpr std::uint64_t kDecimalChunk = 10'000'000'000'000'000'000ULL;  // 10^19
constexpr int kDecimalChunkDigits = 19;

void trim(std::vector<Limb>& v) {
  while (!v.empty() && v.back() == 0) v.pop_back();
}

std::strong_ordering compare_limbs(std::span<const Limb> a, std::span<const Limb> b) {
  if (a.size() != b.size()) return a.size() <=> b.size();
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] <=> b[i];
  }
  return std::strong_ordering::equal;
}

std::vector<Limb> add_limbs(std::span<const Limb> a, std::span<const Limb> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<Limb> out(a.size() + 1);
  Limb carry = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Wide s = Wide(a[i]) + (i < b.size() ? b[i] : 0) + carry;
    out[i] = static_cast<Limb>(s);
    carry = static_cast<Limb>(s >> 64);
  }
  out[a.size()] = carry;
  trim(out);
  return out;
}

// Requires a >= b.
std::vector<Limb> sub_limbs(std::span<const Limb> a, std::span<const Limb> b) {
  std::vector<Limb> out(a.size());
  Limb borrow = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Limb bi = i < b.size() ? b[i] : 0;
    Limb d = a[i] - bi - borrow;
    borrow = (a[i] < bi || (a[i] == bi && borrow)) ? 1 : 0;
    out[i] = d;
  }
  trim(out);
  return out;
}

std::vector<Limb> mul_limbs_schoolbook(std::span<const Limb> a, std::span<const Limb> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<Limb> out(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    Limb carry = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      Wide t = Wide(a[i]) * b[j] + out[i + j] + carry;
      out[i + j] = static_cast<Limb>(t);
      carry = static_cast<Limb>(t >> 64);
    }
    out[i + b.size()] = carry;
  }
  trim(out);
  return out;
}

std::vector<Limb> slice(std::span<const Limb> v, std::size_t from, std::size_t to) {
  from = std::min(from, v.size());
  to = std::min(to, v.size());
  std::vector<Limb> out(v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to));
  trim(out);
  return out;
}

// out += v << (64 * offset)
void accumulate_shifted(std::vector<Limb>& out, std::span<const Limb> v, std::size_t offset) {
  if (out.size() < v.size() + offset + 1) out.resize(v.size() + offset + 1, 0);
  Limb carry = 0;
  std::size_t i = 0;
  for (; i < v.size(); ++i) {
    Wide s = Wide(out[i + offset]) + v[i] + carry;
    out[i + offset] = static_cast<Limb>(s);
    carry = static_cast<Limb>(s >> 64);
  }
  for (std::size_t k = i + offset; carry != 0; ++k) {
    if (k == out.size()) out.push_back(0);
    Wide s = Wide(out[k]) + carry;
    out[k] = static_cast<Limb>(s);
    carry = static_cast<Limb>(s >> 64);
  }
}

std::vector<Limb> mul_limbs(std::span<const Limb> a, std::span<const Limb> b) {
  if (std::min(a.size(), b.size()) < kKaratsubaThreshold) return mul_limbs_schoolbook(a, b);
  const std::size_t half = std::max(a.size(), b.size()) / 2;
  auto a0 = slice(a, 0, half), a1 = slice(a, half, a.size());
  auto b0 = slice(b, 0, half), b1 = slice(b, half, b.size());
  auto z0 = mul_limbs(a0, b0);
  auto z2 = mul_limbs(a1, b1);
  auto z1 = mul_limbs(add_limbs(a0, a1), add_limbs(b0, b1));
  z1 = sub_limbs(sub_limbs(z1, z0), z2);

  std::vector<Limb> out(a.size() + b.size() + 1, 0);
  accumulate_shifted(out, z0, 0);
  accumulate_shifted(out, z1, half);
  accumulate_shifted(out, z2, 2 * half);
  trim(out);
  return out;
}

// Divides in place by a single nonzero limb, returning the remainder.
Limb divide_small_in_place(std::vector<Limb>& v, Limb d) {
  Wide rem = 0;
  for (std::size_t i = v.size(); i-- > 0;) {
    Wide cur = (rem << 64) | v[i];
    v[i] = static_cast<Limb>(cur / d);
    rem = cur % d;
  }
  trim(v);
  return static_cast<Limb>(rem);
}

// v = v * m + addend
void mul_small_add_in_place(std::vector<Limb>& v, Limb m, Limb addend) {
  Limb carry = addend;
  for (auto& limb : v) {
    Wide t = Wide(limb) * m + carry;
    limb = static_cast<Limb>(t);
    carry = static_cast<Limb>(t >> 64);
  }
  if (carry) v.push_back(carry);
}

std::vector<Limb> shift_left(std::span<const Limb> v, std::size_t bits) {
  if (v.empty()) return {};
  const std::size_t limb_shift = bits / 64;
  const unsigned bit_shift = bits % 64;
  std::vector<Limb> out(v.size() + limb_shift + 1, 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i + limb_shift] |= v[i] << bit_shift;
    if (bit_shift) out[i + limb_shift + 1] = v[i] >> (64 - bit_shift);
  }
  trim(out);
  return out;
}

std::vector<Limb> shift_right(std::span<const Limb> v, std::size_t bits) {
  const std::size_t limb_shift = bits / 64;
  if (limb_shift >= v.size()) return {};
  const unsigned bit_shift = bits % 64;
  std::vector<Limb> out(v.size() - limb_shift, 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = v[i + limb_shift] >> bit_shift;
    if (bit_shift && i + limb_shift + 1 < v.size()) out[i] |= v[i + limb_shift + 1] << (64 - bit_shift);
  }
  trim(out);
  return out;
}

}  // namespace

Natural::Natural(std::uint64_t value) {
  if (value != 0) limbs_.push_back(value);
}

void Natural::normalize() { trim(limbs_); }

Natural Natural::from_limbs(std::vector<Limb> limbs) {
  Natural n;
  n.limbs_ = std::move(limbs);
  n.normalize();
  return n;
}

Natural Natural::from_decimal(std::string_view digits) {
  if (digits.empty()) throw FormatError("empty decimal string");
  for (char c : digits) {
    if (c < '0' || c > '9') throw FormatError("invalid decimal digit");
  }
  std::vector<Limb> v;
  std::size_t pos = 0;
  // First chunk takes the leftover so every later chunk is exactly 19 digits.
  std::size_t first = digits.size() % kDecimalChunkDigits;
  if (first == 0) first = kDecimalChunkDigits;
  while (pos < digits.size()) {
    std::size_t len = pos == 0 ? first : kDecimalChunkDigits;
    Limb chunk = 0, scale = 1;
    for (std::size_t i = 0; i < len; ++i) {
      chunk = chunk * 10 + static_cast<Limb>(digits[pos + i] - '0');
      scale *= 10;
    }
    mul_small_add_in_place(v, scale, chunk);
    pos += len;
  }
  return from_limbs(std::move(v));
}

Natural Natural::from_hex(std::string_view digits) {
  if (digits.starts_with("0x") || digits.starts_with("0X")) digits.remove_prefix(2);
  if (digits.empty()) throw FormatError("empty hex string");
  std::vector<Limb> v((digits.size() + 15) / 16, 0);
  std::size_t bit = 0;
  for (std::size_t i = digits.size(); i-- > 0; bit += 4) {
    char c = digits[i];
    Limb d;
    if (c >= '0' && c <= '9') d = static_cast<Limb>(c - '0');
    else if (c >= 'a' && c <= 'f') d = static_cast<Limb>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') d = static_cast<Limb>(c - 'A' + 10);
    else throw FormatError("invalid hex digit");
    v[bit / 64] |= d << (bit % 64);
  }
  return from_limbs(std::move(v));
}

Natural Natural::from_bytes_be(ByteView bytes) {
  std::vector<Limb> v((bytes.size() + 7) / 8, 0);
  std::size_t bit = 0;
  for (std::size_t i = bytes.size(); i-- > 0; bit += 8) {
    v[bit / 64] |= Limb(bytes[i]) << (bit % 64);
  }
  return from_limbs(std::move(v));
}

Natural Natural::power_of_two(std::size_t exponent) {
  std::vector<Limb> v(exponent / 64 + 1, 0);
  v.back() = Limb(1) << (exponent % 64);
  return from_limbs(std::move(v));
}

std::string Natural::to_decimal() const {
  if (is_zero()) return "0";
  std::vector<Limb> v = limbs_;
  std::vector<Limb> chunks;
  while (!v.empty()) chunks.push_back(divide_small_in_place(v, kDecimalChunk));
  std::string out = std::to_string(chunks.back());
  for (std::size_t i = chunks.size() - 1; i-- > 0;) {
    std::string part = std::to_string(chunks[i]);
    out.append(kDecimalChunkDigits - part.size(), '0');
    out += part;
  }
  return out;
}

std::string Natural::to_hex() const {
  if (is_zero()) return "0";
  std::string out = medledger::to_hex(to_bytes_be());
  auto first = out.find_first_not_of('0');
  return out.substr(first);
}

Bytes Natural::to_bytes_be(std::size_t width) const {
  const std::size_t len = byte_length();
  if (width != 0 && len > width) throw InvalidArgument("value does not fit in requested width");
  const std::size_t size = std::max(width, len);
  Bytes out(size, 0);
  for (std::size_t i = 0; i < len; ++i) {
    out[size - 1 - i] = static_cast<std::uint8_t>(limbs_[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

std::size_t Natural::bit_length() const {
  if (is_zero()) return 0;
  return (limbs_.size() - 1) * kLimbBits + (kLimbBits - static_cast<std::size_t>(std::countl_zero(limbs_.back())));
}

bool Natural::bit(std::size_t index) const {
  if (index / 64 >= limbs_.size()) return false;
  return (limbs_[index / 64] >> (index % 64)) & 1U;
}

Natural& Natural::operator+=(const Natural& rhs) { return *this = add(*this, rhs); }
Natural& Natural::operator-=(const Natural& rhs) { return *this = sub(*this, rhs); }
Natural& Natural::operator*=(const Natural& rhs) { return *this = mul(*this, rhs); }
Natural& Natural::operator/=(const Natural& rhs) { return *this = div_rem(*this, rhs).quotient; }
Natural& Natural::operator%=(const Natural& rhs) { return *this = div_rem(*this, rhs).remainder; }

Natural& Natural::operator<<=(std::size_t bits) {
  limbs_ = shift_left(limbs_, bits);
  return *this;
}

Natural& Natural::operator>>=(std::size_t bits) {
  limbs_ = shift_right(limbs_, bits);
  return *this;
}

std::strong_ordering operator<=>(const Natural& a, const Natural& b) {
  return compare_limbs(a.limbs(), b.limbs());
}

Natural add(const Natural& a, const Natural& b) { return Natural::from_limbs(add_limbs(a.limbs(), b.limbs())); }

Natural sub(const Natural& a, const Natural& b) {
  if (a < b) throw ArithmeticError("natural subtraction underflow");
  return Natural::from_limbs(sub_limbs(a.limbs(), b.limbs()));
}

Natural mul(const Natural& a, const Natural& b) { return Natural::from_limbs(mul_limbs(a.limbs(), b.limbs())); }

Natural mul_schoolbook(const Natural& a, const Natural& b) {
  return Natural::from_limbs(mul_limbs_schoolbook(a.limbs(), b.limbs()));
}

std::uint64_t mod_small(const Natural& a, std::uint64_t m) {
  if (m == 0) throw ArithmeticError("division by zero");
  Wide rem = 0;
  auto limbs = a.limbs();
  for (std::size_t i = limbs.size(); i-- > 0;) rem = ((rem << 64) | limbs[i]) % m;
  return static_cast<std::uint64_t>(rem);
}

// Knuth, TAOCP vol. 2, 4.3.1 Algorithm D on 64-bit digits.
DivRem div_rem(const Natural& a, const Natural& b) {
  if (b.is_zero()) throw ArithmeticError("division by zero");
  if (a < b) return {Natural{}, a};
  if (b.limbs().size() == 1) {
    std::vector<Limb> q(a.limbs().begin(), a.limbs().end());
    Limb r = divide_small_in_place(q, b.limbs()[0]);
    return {Natural::from_limbs(std::move(q)), Natural(r)};
  }

  const unsigned s = static_cast<unsigned>(std::countl_zero(b.limbs().back()));
  std::vector<Limb> vn = shift_left(b.limbs(), s);
  std::vector<Limb> un = shift_left(a.limbs(), s);
  const std::size_t n = vn.size();
  un.resize(a.limbs().size() + 1, 0);
  const std::size_t m = un.size() - n;
  std::vector<Limb> q(m, 0);

  const Wide base = Wide(1) << 64;
  for (std::size_t j = m; j-- > 0;) {
    Wide num = (Wide(un[j + n]) << 64) | un[j + n - 1];
    Wide qhat = num / vn[n - 1];
    Wide rhat = num % vn[n - 1];
    while (qhat >= base || qhat * vn[n - 2] > ((rhat << 64) | un[j + n - 2])) {
      --qhat;
      rhat += vn[n - 1];
      if (rhat >= base) break;
    }

    SignedWide borrow = 0;
    SignedWide t = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Wide p = qhat * vn[i];
      t = SignedWide(un[i + j]) - borrow - SignedWide(static_cast<Limb>(p));
      un[i + j] = static_cast<Limb>(t);
      borrow = SignedWide(p >> 64) - (t >> 64);
    }
    t = SignedWide(un[j + n]) - borrow;
    un[j + n] = static_cast<Limb>(t);

    q[j] = static_cast<Limb>(qhat);
    if (t < 0) {
      --q[j];
      Wide carry = 0;
      for (std::size_t i = 0; i < n; ++i) {
        Wide sum = Wide(un[i + j]) + vn[i] + carry;
        un[i + j] = static_cast<Limb>(sum);
        carry = sum >> 64;
      }
      un[j + n] += static_cast<Limb>(carry);
    }
  }

  un.resize(n);
  trim(un);
  return {Natural::from_limbs(std::move(q)), Natural::from_limbs(shift_right(un, s))};
}

}  // namespace medledger::mpa
