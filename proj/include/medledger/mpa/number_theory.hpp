#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "medledger/mpa/natural.hpp"
#include "medledger/mpa/rng.hpp"

namespace medledger::mpa {

/// Throws ArithmeticError for gcd(0, 0).
Natural gcd(const Natural& a, const Natural& b);

/// base^exp mod modulus. Odd moduli run through Montgomery multiplication,
/// even ones through plain square-and-multiply. Throws ArithmeticError when
/// modulus <= 1.
Natural mod_pow(const Natural& base, const Natural& exp, const Natural& modulus);

/// Left-to-right square-and-multiply with a full division after every
/// product. Independent of the Montgomery path; kept as its cross-check.
Natural mod_pow_plain(const Natural& base, const Natural& exp, const Natural& modulus);

/// d with a*d = 1 (mod m) and 0 < d < m. Throws NoInverse if gcd(a, m) != 1,
/// ArithmeticError if m <= 1.
Natural mod_inverse(const Natural& a, const Natural& m);

/// All primes below 1000, ascending.
std::span<const std::uint32_t> small_primes();

/// Trial division by small_primes(), then `rounds` Miller-Rabin rounds with
/// random bases. Numbers below 1000^2 are decided by trial division alone.
bool is_probable_prime(const Natural& n, std::size_t rounds, Rng& rng);

inline constexpr std::size_t kKeygenMillerRabinRounds = 40;

enum class TopBits { One, Two };

/// Random probable prime of exactly `bits` bits. TopBits::Two also sets the
/// second-highest bit so a product of two such primes has exactly 2*bits bits.
/// Throws InvalidArgument if bits < 8.
Natural gen_prime(std::size_t bits, Rng& rng, TopBits top = TopBits::One);

/// Montgomery arithmetic modulo a fixed odd modulus > 1.
class Montgomery {
 public:
  explicit Montgomery(const Natural& modulus);

  const Natural& modulus() const { return modulus_; }
  Natural to_montgomery(const Natural& x) const;
  Natural from_montgomery(const Natural& x) const;
  /// a*b*R^-1 mod n, both inputs in Montgomery form.
  Natural multiply(const Natural& a, const Natural& b) const;
  Natural pow(const Natural& base, const Natural& exp) const;

 private:
  using Limb = Natural::Limb;
  void multiply_into(std::span<const Limb> a, std::span<const Limb> b, std::vector<Limb>& out,
                     std::vector<Limb>& scratch) const;

  Natural modulus_;
  std::vector<Limb> n_;
  Limb n_prime_ = 0;  // -n^-1 mod 2^64
  Natural r_squared_;
};

}  // namespace medledger::mpa
