#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "medledger/bytes.hpp"
#include "medledger/mpa/natural.hpp"
#include "medledger/mpa/rng.hpp"

namespace medledger::rsa {

using mpa::Natural;

inline constexpr std::uint64_t kPublicExponent = 65537;
inline constexpr std::size_t kSessionKeySize = 32;
inline constexpr std::size_t kMinWrapModulusBits = 512;

using SessionKey = std::array<std::uint8_t, kSessionKeySize>;

struct RsaPublicKey {
  Natural e;
  Natural n;

  std::size_t modulus_bytes() const { return n.byte_length(); }
  friend bool operator==(const RsaPublicKey&, const RsaPublicKey&) = default;
};

struct RsaPrivateKey {
  Natural d;
  Natural n;

  std::size_t modulus_bytes() const { return n.byte_length(); }
  friend bool operator==(const RsaPrivateKey&, const RsaPrivateKey&) = default;
};

struct Provenance {
  std::size_t bits = 0;
  std::uint64_t seed_id = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct RsaKeyPair {
  RsaPublicKey pub;
  RsaPrivateKey pri;
  Provenance provenance;
  friend bool operator==(const RsaKeyPair&, const RsaKeyPair&) = default;
};

/// Key sizes keygen accepts.
bool is_supported_key_size(std::size_t bits);

/// Two distinct primes of bits/2 bits each (top two bits set), e = 65537,
/// d = e^-1 mod (a-1)(b-1). Prime generation is retried until
/// gcd(e, phi) = 1. Throws InvalidArgument for unsupported sizes.
RsaKeyPair keygen(std::size_t bits, mpa::Rng& rng);

/// (a-1)(b-1)
Natural totient(const Natural& a, const Natural& b);

/// Builds a key pair from chosen primes and exponent: n = a*b,
/// d = e^-1 mod phi(n). Requires 1 < e < phi and gcd(e, phi) = 1; throws
/// NoInverse otherwise. No primality check is made on a and b.
RsaKeyPair keypair_from_primes(const Natural& a, const Natural& b, const Natural& e);

/// C = P^e mod n. Throws InvalidArgument if P >= n.
Natural rsa_encrypt_raw(const Natural& plain, const RsaPublicKey& pub);
/// P = C^d mod n. Throws InvalidArgument if C >= n.
Natural rsa_decrypt_raw(const Natural& cipher, const RsaPrivateKey& pri);

/// Encrypts 0x00 || 0x02 || nonzero filler || 0x00 || sk, sized to the modulus.
/// The result is exactly modulus_bytes() long.
Bytes wrap_session_key(const SessionKey& sk, const RsaPublicKey& pub, mpa::Rng& rng);
/// Throws UnwrapError if the block is the wrong size or the decrypted padding
/// is malformed.
SessionKey unwrap_session_key(ByteView wrapped, const RsaPrivateKey& pri);

// "MLPK" | u32 modulus bits | u32 len | e | u32 len | n   (big-endian)
Bytes encode_public_key(const RsaPublicKey& pub);
RsaPublicKey decode_public_key(ByteView bytes);
// "MLSK" | u32 modulus bits | u32 len | d | u32 len | n
Bytes encode_private_key(const RsaPrivateKey& pri);
RsaPrivateKey decode_private_key(ByteView bytes);

/// SHA-256 of encode_public_key(pub).
Digest fingerprint(const RsaPublicKey& pub);

}  // namespace medledger::rsa
