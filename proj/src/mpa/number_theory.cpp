#include "medledger/mpa/number_theory.hpp"

#include <array>

#include "medledger/errors.hpp"

namespace medledger::mpa {

namespace {

using Limb = Natural::Limb;
using Wide = unsigned __int128;

constexpr auto kSmallPrimes = [] {
  std::array<std::uint32_t, 168> primes{};
  std::size_t count = 0;
  for (std::uint32_t n = 2; n < 1000; ++n) {
    bool prime = true;
    for (std::uint32_t d = 2; d * d <= n; ++d) {
      if (n % d == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes[count++] = n;
  }
  return primes;
}();

void set_bit(Natural& x, std::size_t index) {
  if (!x.bit(index)) x += Natural::power_of_two(index);
}

}  // namespace

std::span<const std::uint32_t> small_primes() { return kSmallPrimes; }

Natural gcd(const Natural& a, const Natural& b) {
  if (a.is_zero() && b.is_zero()) throw ArithmeticError("gcd(0, 0) is undefined");
  Natural x = a, y = b;
  while (!y.is_zero()) {
    Natural r = div_rem(x, y).remainder;
    x = std::move(y);
    y = std::move(r);
  }
  return x;
}

Montgomery::Montgomery(const Natural& modulus) : modulus_(modulus) {
  if (!modulus.is_odd() || modulus <= Natural(1)) throw ArithmeticError("Montgomery modulus must be odd and > 1");
  n_.assign(modulus.limbs().begin(), modulus.limbs().end());
  // Newton iteration doubles the number of correct low bits each step.
  Limb inv = n_[0];
  for (int i = 0; i < 6; ++i) inv *= 2 - n_[0] * inv;
  n_prime_ = ~inv + 1;
  r_squared_ = div_rem(Natural::power_of_two(2 * 64 * n_.size()), modulus_).remainder;
}

// CIOS: interleaved multiplication and reduction, one limb of `a` at a time.
void Montgomery::multiply_into(std::span<const Limb> a, std::span<const Limb> b, std::vector<Limb>& out,
                               std::vector<Limb>& t) const {
  const std::size_t s = n_.size();
  t.assign(s + 2, 0);
  for (std::size_t i = 0; i < s; ++i) {
    const Limb ai = i < a.size() ? a[i] : 0;
    Limb carry = 0;
    for (std::size_t j = 0; j < s; ++j) {
      Wide cs = Wide(t[j]) + Wide(ai) * (j < b.size() ? b[j] : 0) + carry;
      t[j] = static_cast<Limb>(cs);
      carry = static_cast<Limb>(cs >> 64);
    }
    Wide cs = Wide(t[s]) + carry;
    t[s] = static_cast<Limb>(cs);
    t[s + 1] = static_cast<Limb>(cs >> 64);

    const Limb m = t[0] * n_prime_;
    cs = Wide(t[0]) + Wide(m) * n_[0];
    carry = static_cast<Limb>(cs >> 64);
    for (std::size_t j = 1; j < s; ++j) {
      cs = Wide(t[j]) + Wide(m) * n_[j] + carry;
      t[j - 1] = static_cast<Limb>(cs);
      carry = static_cast<Limb>(cs >> 64);
    }
    cs = Wide(t[s]) + carry;
    t[s - 1] = static_cast<Limb>(cs);
    t[s] = t[s + 1] + static_cast<Limb>(cs >> 64);
  }

  // t < 2n here; one conditional subtraction brings it below n.
  bool ge = t[s] != 0;
  if (!ge) {
    ge = true;
    for (std::size_t j = s; j-- > 0;) {
      if (t[j] != n_[j]) {
        ge = t[j] > n_[j];
        break;
      }
    }
  }
  out.assign(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(s));
  if (ge) {
    Limb borrow = 0;
    for (std::size_t j = 0; j < s; ++j) {
      Limb d = out[j] - n_[j] - borrow;
      borrow = (out[j] < n_[j] || (out[j] == n_[j] && borrow)) ? 1 : 0;
      out[j] = d;
    }
  }
}

Natural Montgomery::multiply(const Natural& a, const Natural& b) const {
  std::vector<Limb> out, scratch;
  multiply_into(a.limbs(), b.limbs(), out, scratch);
  return Natural::from_limbs(std::move(out));
}

Natural Montgomery::to_montgomery(const Natural& x) const {
  Natural reduced = x < modulus_ ? x : div_rem(x, modulus_).remainder;
  return multiply(reduced, r_squared_);
}

Natural Montgomery::from_montgomery(const Natural& x) const { return multiply(x, Natural(1)); }

// Fixed 4-bit window over the exponent, most significant window first.
Natural Montgomery::pow(const Natural& base, const Natural& exp) const {
  constexpr unsigned kWindow = 4;
  std::vector<Limb> scratch;
  std::array<std::vector<Limb>, 1U << kWindow> table;
  const Natural one_m = to_montgomery(Natural(1));
  const Natural base_m = to_montgomery(base);
  table[0].assign(one_m.limbs().begin(), one_m.limbs().end());
  table[1].assign(base_m.limbs().begin(), base_m.limbs().end());
  for (std::size_t i = 2; i < table.size(); ++i) multiply_into(table[i - 1], table[1], table[i], scratch);

  std::vector<Limb> acc = table[0], tmp;
  const std::size_t bits = exp.bit_length();
  const std::size_t windows = (bits + kWindow - 1) / kWindow;
  for (std::size_t w = windows; w-- > 0;) {
    if (w + 1 != windows) {
      for (unsigned k = 0; k < kWindow; ++k) {
        multiply_into(acc, acc, tmp, scratch);
        acc.swap(tmp);
      }
    }
    unsigned digit = 0;
    for (unsigned k = kWindow; k-- > 0;) digit = (digit << 1) | (exp.bit(w * kWindow + k) ? 1U : 0U);
    if (digit != 0) {
      multiply_into(acc, table[digit], tmp, scratch);
      acc.swap(tmp);
    }
  }
  // Leave Montgomery form: acc * 1 * R^-1.
  const std::array<Limb, 1> one{1};
  multiply_into(acc, one, tmp, scratch);
  return Natural::from_limbs(std::move(tmp));
}

Natural mod_pow_plain(const Natural& base, const Natural& exp, const Natural& modulus) {
  if (modulus <= Natural(1)) throw ArithmeticError("mod_pow modulus must be > 1");
  const Natural b = div_rem(base, modulus).remainder;
  Natural result(1);
  for (std::size_t i = exp.bit_length(); i-- > 0;) {
    result = div_rem(result * result, modulus).remainder;
    if (exp.bit(i)) result = div_rem(result * b, modulus).remainder;
  }
  return result;
}

Natural mod_pow(const Natural& base, const Natural& exp, const Natural& modulus) {
  if (modulus <= Natural(1)) throw ArithmeticError("mod_pow modulus must be > 1");
  if (exp.is_zero()) return Natural(1);
  if (!modulus.is_odd()) return mod_pow_plain(base, exp, modulus);
  return Montgomery(modulus).pow(base, exp);
}

Natural mod_inverse(const Natural& a, const Natural& m) {
  if (m <= Natural(1)) throw ArithmeticError("mod_inverse modulus must be > 1");
  // Extended Euclid keeping the Bezout coefficient reduced into [0, m).
  Natural r0 = m, r1 = div_rem(a, m).remainder;
  Natural t0(0), t1(1);
  while (!r1.is_zero()) {
    auto [q, r] = div_rem(r0, r1);
    Natural qt = div_rem(q * t1, m).remainder;
    Natural next = t0 >= qt ? sub(t0, qt) : sub(add(t0, m), qt);
    r0 = std::move(r1);
    r1 = std::move(r);
    t0 = std::move(t1);
    t1 = std::move(next);
  }
  if (r0 != Natural(1)) throw NoInverse("no modular inverse: gcd(a, m) = " + r0.to_decimal());
  if (div_rem(a * t0, m).remainder != Natural(1)) throw ArithmeticError("mod_inverse postcondition failed");
  return t0;
}

bool is_probable_prime(const Natural& n, std::size_t rounds, Rng& rng) {
  if (rounds == 0) throw InvalidArgument("is_probable_prime needs at least one round");
  if (n < Natural(2)) return false;
  for (std::uint32_t p : kSmallPrimes) {
    if (n == Natural(p)) return true;
    if (mod_small(n, p) == 0) return false;
  }
  // No factor below 1000, so anything below 1000^2 is prime.
  if (n < Natural(1'000'000)) return true;

  const Natural n_minus_1 = sub(n, Natural(1));
  std::size_t s = 0;
  while (!n_minus_1.bit(s)) ++s;
  const Natural d = n_minus_1 >> s;
  const Montgomery mont(n);
  const Natural two(2), upper = sub(n, two);

  for (std::size_t round = 0; round < rounds; ++round) {
    Natural x = mont.pow(rng.uniform_between(two, upper), d);
    if (x == Natural(1) || x == n_minus_1) continue;
    bool witness = true;
    for (std::size_t i = 1; i < s; ++i) {
      x = div_rem(x * x, n).remainder;
      if (x == n_minus_1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

Natural gen_prime(std::size_t bits, Rng& rng, TopBits top) {
  if (bits < 8) throw InvalidArgument("gen_prime needs at least 8 bits");
  for (;;) {
    Natural candidate = rng.random_bits(bits);
    set_bit(candidate, bits - 1);
    if (top == TopBits::Two) set_bit(candidate, bits - 2);
    set_bit(candidate, 0);
    if (is_probable_prime(candidate, kKeygenMillerRabinRounds, rng)) return candidate;
  }
}

}  // namespace medledger::mpa
