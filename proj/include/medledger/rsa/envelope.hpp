#pragma once

#include <cstdint>

#include "medledger/bytes.hpp"
#include "medledger/mpa/rng.hpp"
#include "medledger/rsa/rsa.hpp"
#include "medledger/twofish/twofish.hpp"

namespace medledger::rsa {

inline constexpr std::uint8_t kEnvelopeVersion = 0x01;

/// Two-layer encrypted record: the Twofish-CBC payload (E1) and the
/// RSA-wrapped session key (E2), plus the receiver fingerprint and a
/// SHA-256 digest of the plaintext.
///
/// Wire format, all integers big-endian:
///   "MLEN" | version | fingerprint(32) | u32 len | E2 | iv(16) | u64 len | E1 | digest(32)
struct Envelope {
  std::uint8_t version = kEnvelopeVersion;
  Digest fingerprint{};
  Bytes wrapped_key;
  twofish::Block iv{};
  Bytes payload;
  Digest digest{};

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

Bytes encode_envelope(const Envelope& env);
/// Throws FormatError on bad magic, unknown version, truncation or trailing bytes.
Envelope decode_envelope(ByteView bytes);

/// Fresh 256-bit session key and IV from `rng` on every call. Throws
/// InvalidArgument on empty data.
Envelope hybrid_encrypt(ByteView data, const RsaPublicKey& receiver, mpa::Rng& rng);

/// Unwraps the session key, decrypts E1 and verifies the digest. Throws
/// UnwrapError for a wrong key and IntegrityError for a digest or padding
/// failure; plaintext is only returned after full verification.
Bytes hybrid_decrypt(const Envelope& env, const RsaPrivateKey& receiver);

/// As above, and first rejects envelopes addressed to another key
/// (fingerprint mismatch -> UnwrapError).
Bytes hybrid_decrypt(const Envelope& env, const RsaKeyPair& receiver);

}  // namespace medledger::rsa
