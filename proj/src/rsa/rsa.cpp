#include "medledger/rsa/rsa.hpp"

#include <algorithm>
#include <string_view>

#include "medledger/errors.hpp"
#include "medledger/ledger/sha256.hpp"
#include "medledger/mpa/number_theory.hpp"

namespace medledger::rsa {

namespace {

constexpr std::string_view kPublicMagic = "MLPK";
constexpr std::string_view kPrivateMagic = "MLSK";

Bytes encode_key(std::string_view magic, const Natural& exponent, const Natural& n) {
  Bytes out(magic.begin(), magic.end());
  put_u32(out, static_cast<std::uint32_t>(n.bit_length()));
  for (const Natural* v : {&exponent, &n}) {
    Bytes be = v->to_bytes_be();
    put_u32(out, static_cast<std::uint32_t>(be.size()));
    out.insert(out.end(), be.begin(), be.end());
  }
  return out;
}

std::pair<Natural, Natural> decode_key(std::string_view magic, ByteView bytes) {
  ByteReader in(bytes);
  auto m = in.take(4);
  if (!std::equal(m.begin(), m.end(), magic.begin())) throw FormatError("bad key magic");
  const std::uint32_t bits = in.u32();
  Natural exponent = Natural::from_bytes_be(in.take(in.u32()));
  Natural n = Natural::from_bytes_be(in.take(in.u32()));
  in.expect_done("key");
  if (n.bit_length() != bits) throw FormatError("key bit length does not match modulus");
  if (n <= Natural(1) || exponent.is_zero()) throw FormatError("degenerate key");
  return {std::move(exponent), std::move(n)};
}

}  // namespace

bool is_supported_key_size(std::size_t bits) {
  return bits == 512 || bits == 1024 || bits == 2048 || bits == 4096;
}

Natural totient(const Natural& a, const Natural& b) { return mpa::sub(a, Natural(1)) * mpa::sub(b, Natural(1)); }

RsaKeyPair keypair_from_primes(const Natural& a, const Natural& b, const Natural& e) {
  const Natural n = a * b;
  const Natural phi = totient(a, b);
  if (e <= Natural(1) || e >= phi) throw InvalidArgument("public exponent must satisfy 1 < e < phi(n)");
  Natural d = mpa::mod_inverse(e, phi);
  return RsaKeyPair{{e, n}, {std::move(d), n}, {n.bit_length(), 0}};
}

RsaKeyPair keygen(std::size_t bits, mpa::Rng& rng) {
  if (!is_supported_key_size(bits)) {
    throw InvalidArgument("unsupported RSA key size " + std::to_string(bits) + " (use 512, 1024, 2048 or 4096)");
  }
  const Natural e(kPublicExponent);
  const std::uint64_t seed_id = rng.seed_id();
  auto prime_coprime_to_e = [&] {
    for (;;) {
      Natural p = mpa::gen_prime(bits / 2, rng, mpa::TopBits::Two);
      if (mpa::gcd(e, mpa::sub(p, Natural(1))) == Natural(1)) return p;
    }
  };
  for (;;) {
    Natural a = prime_coprime_to_e();
    Natural b = prime_coprime_to_e();
    if (a == b) continue;
    RsaKeyPair pair = keypair_from_primes(a, b, e);
    if (pair.pub.n.bit_length() != bits) continue;
    if (mpa::div_rem(e * pair.pri.d, totient(a, b)).remainder != Natural(1)) {
      throw ArithmeticError("generated key pair violates e*d = 1 mod phi");
    }
    pair.provenance = {bits, seed_id};
    return pair;
  }
}

Natural rsa_encrypt_raw(const Natural& plain, const RsaPublicKey& pub) {
  if (plain >= pub.n) throw InvalidArgument("RSA plaintext must be smaller than the modulus");
  return mpa::mod_pow(plain, pub.e, pub.n);
}

Natural rsa_decrypt_raw(const Natural& cipher, const RsaPrivateKey& pri) {
  if (cipher >= pri.n) throw InvalidArgument("RSA ciphertext must be smaller than the modulus");
  return mpa::mod_pow(cipher, pri.d, pri.n);
}

Bytes wrap_session_key(const SessionKey& sk, const RsaPublicKey& pub, mpa::Rng& rng) {
  if (pub.n.bit_length() < kMinWrapModulusBits) throw InvalidArgument("modulus too small to wrap a session key");
  const std::size_t k = pub.modulus_bytes();
  Bytes block(k, 0);
  block[1] = 0x02;
  const std::size_t filler_end = k - kSessionKeySize - 1;
  for (std::size_t i = 2; i < filler_end; ++i) {
    do {
      rng.fill(std::span(&block[i], 1));
    } while (block[i] == 0);
  }
  std::copy(sk.begin(), sk.end(), block.begin() + static_cast<std::ptrdiff_t>(k - kSessionKeySize));
  return rsa_encrypt_raw(Natural::from_bytes_be(block), pub).to_bytes_be(k);
}

SessionKey unwrap_session_key(ByteView wrapped, const RsaPrivateKey& pri) {
  const std::size_t k = pri.modulus_bytes();
  if (pri.n.bit_length() < kMinWrapModulusBits) throw UnwrapError("modulus too small for a wrapped session key");
  if (wrapped.size() != k) throw UnwrapError("wrapped key length does not match the modulus");
  const Natural c = Natural::from_bytes_be(wrapped);
  if (c >= pri.n) throw UnwrapError("wrapped key is not below the modulus");
  const Bytes block = rsa_decrypt_raw(c, pri).to_bytes_be(k);

  const std::size_t filler_end = k - kSessionKeySize - 1;
  bool ok = block[0] == 0x00 && block[1] == 0x02 && block[filler_end] == 0x00;
  for (std::size_t i = 2; i < filler_end; ++i) ok = ok && block[i] != 0;
  if (!ok) throw UnwrapError("session key padding is malformed (wrong private key or tampered envelope)");

  SessionKey sk{};
  std::copy(block.end() - kSessionKeySize, block.end(), sk.begin());
  return sk;
}

Bytes encode_public_key(const RsaPublicKey& pub) { return encode_key(kPublicMagic, pub.e, pub.n); }

RsaPublicKey decode_public_key(ByteView bytes) {
  auto [e, n] = decode_key(kPublicMagic, bytes);
  return {std::move(e), std::move(n)};
}

Bytes encode_private_key(const RsaPrivateKey& pri) { return encode_key(kPrivateMagic, pri.d, pri.n); }

RsaPrivateKey decode_private_key(ByteView bytes) {
  auto [d, n] = decode_key(kPrivateMagic, bytes);
  return {std::move(d), std::move(n)};
}

Digest fingerprint(const RsaPublicKey& pub) { return ledger::sha256(encode_public_key(pub)); }

}  // namespace medledger::rsa
