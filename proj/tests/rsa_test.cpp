#include <gtest/gtest.h>

#include "medledger/errors.hpp"
#include "medledger/mpa/number_theory.hpp"
#include "medledger/rsa/envelope.hpp"
#include "medledger/rsa/rsa.hpp"

using namespace medledger;
using namespace medledger::rsa;
using mpa::Natural;
using mpa::Rng;

namespace {

const RsaKeyPair& key1024() {
  static const RsaKeyPair keys = [] {
    Rng rng = Rng::from_u64(1024);
    return keygen(1024, rng);
  }();
  return keys;
}

const RsaKeyPair& other1024() {
  static const RsaKeyPair keys = [] {
    Rng rng = Rng::from_u64(2048);
    return keygen(1024, rng);
  }();
  return keys;
}

}  // namespace

// Oracle values worked by hand from the textbook formulas.
TEST(Rsa, ToyTrace) {
  const RsaKeyPair k = keypair_from_primes(Natural(61), Natural(53), Natural(17));
  EXPECT_EQ(k.pub.n, Natural(3233));
  EXPECT_EQ(totient(Natural(61), Natural(53)), Natural(3120));
  EXPECT_EQ(k.pri.d, Natural(2753));
  EXPECT_EQ(rsa_encrypt_raw(Natural(65), k.pub), Natural(2790));
  EXPECT_EQ(rsa_decrypt_raw(Natural(2790), k.pri), Natural(65));
}

TEST(Rsa, ToyKeyRejectsBadExponent) {
  EXPECT_THROW(keypair_from_primes(Natural(61), Natural(53), Natural(3)), NoInverse);    // 3 | 3120
  EXPECT_THROW(keypair_from_primes(Natural(61), Natural(53), Natural(1)), InvalidArgument);
  EXPECT_THROW(keypair_from_primes(Natural(61), Natural(53), Natural(3120)), InvalidArgument);
}

TEST(Rsa, RawRejectsOutOfRange) {
  const RsaKeyPair k = keypair_from_primes(Natural(61), Natural(53), Natural(17));
  EXPECT_THROW(rsa_encrypt_raw(Natural(3233), k.pub), InvalidArgument);
  EXPECT_THROW(rsa_decrypt_raw(Natural(4000), k.pri), InvalidArgument);
}

TEST(Rsa, ToyRoundTripExhaustive) {
  const RsaKeyPair k = keypair_from_primes(Natural(61), Natural(53), Natural(17));
  for (std::uint64_t m = 0; m < 3233; ++m) {
    ASSERT_EQ(rsa_decrypt_raw(rsa_encrypt_raw(Natural(m), k.pub), k.pri), Natural(m));
  }
}

TEST(Rsa, KeygenInvariants) {
  for (std::size_t bits : {512u, 1024u}) {
    Rng rng = Rng::from_u64(bits);
    const RsaKeyPair k = keygen(bits, rng);
    EXPECT_EQ(k.pub.n.bit_length(), bits);
    EXPECT_EQ(k.pub.e, Natural(kPublicExponent));
    EXPECT_EQ(k.pub.n, k.pri.n);
    EXPECT_EQ(k.provenance.bits, bits);
    EXPECT_EQ(k.provenance.seed_id, bits);
    for (std::uint64_t m : {2ull, 12345ull, 0xdeadbeefull}) {
      EXPECT_EQ(rsa_decrypt_raw(rsa_encrypt_raw(Natural(m), k.pub), k.pri), Natural(m));
    }
  }
  Rng rng = Rng::from_u64(1);
  EXPECT_THROW(keygen(1000, rng), InvalidArgument);
  EXPECT_THROW(keygen(256, rng), InvalidArgument);
}

TEST(Rsa, KeygenDeterministicUnderSeed) {
  Rng a = Rng::from_u64(77), b = Rng::from_u64(77);
  EXPECT_EQ(keygen(512, a), keygen(512, b));
}

TEST(Rsa, SessionKeyWrap) {
  Rng rng = Rng::from_u64(8);
  SessionKey sk{};
  rng.fill(sk);
  const Bytes w1 = wrap_session_key(sk, key1024().pub, rng);
  const Bytes w2 = wrap_session_key(sk, key1024().pub, rng);
  EXPECT_EQ(w1.size(), key1024().pub.modulus_bytes());
  EXPECT_NE(w1, w2);  // fresh filler each time
  EXPECT_EQ(unwrap_session_key(w1, key1024().pri), sk);
  EXPECT_EQ(unwrap_session_key(w2, key1024().pri), sk);
  EXPECT_THROW(unwrap_session_key(w1, other1024().pri), UnwrapError);
  EXPECT_THROW(unwrap_session_key(Bytes(w1.begin(), w1.end() - 1), key1024().pri), UnwrapError);
}

TEST(Rsa, WrapNeedsLargeEnoughModulus) {
  Rng rng = Rng::from_u64(9);
  const RsaKeyPair toy = keypair_from_primes(Natural(61), Natural(53), Natural(17));
  EXPECT_THROW(wrap_session_key(SessionKey{}, toy.pub, rng), InvalidArgument);
}

TEST(Rsa, KeyEncodingRoundTrip) {
  const RsaKeyPair& k = key1024();
  EXPECT_EQ(decode_public_key(encode_public_key(k.pub)), k.pub);
  EXPECT_EQ(decode_private_key(encode_private_key(k.pri)), k.pri);
  Bytes pub = encode_public_key(k.pub);
  EXPECT_THROW(decode_private_key(pub), FormatError);
  pub.push_back(0);
  EXPECT_THROW(decode_public_key(pub), FormatError);
  EXPECT_THROW(decode_public_key(Bytes{'M', 'L', 'P', 'K'}), FormatError);
  EXPECT_NE(fingerprint(k.pub), fingerprint(other1024().pub));
}

TEST(Envelope, RoundTripSizes) {
  Rng rng = Rng::from_u64(10);
  for (std::size_t n : {1u, 15u, 16u, 17u, 1000u, 100u * 1024u}) {
    Bytes data(n);
    rng.fill(data);
    const Envelope env = hybrid_encrypt(data, key1024().pub, rng);
    EXPECT_EQ(env.fingerprint, fingerprint(key1024().pub));
    const Envelope decoded = decode_envelope(encode_envelope(env));
    EXPECT_EQ(decoded, env);
    EXPECT_EQ(hybrid_decrypt(decoded, key1024()), data);
    EXPECT_EQ(hybrid_decrypt(decoded, key1024().pri), data);
  }
}

TEST(Envelope, FreshKeyEveryCall) {
  Rng rng = Rng::from_u64(11);
  const Bytes data(100, 1);
  const Envelope a = hybrid_encrypt(data, key1024().pub, rng);
  const Envelope b = hybrid_encrypt(data, key1024().pub, rng);
  EXPECT_NE(a.wrapped_key, b.wrapped_key);
  EXPECT_NE(a.iv, b.iv);
  EXPECT_NE(a.payload, b.payload);
}

TEST(Envelope, Errors) {
  Rng rng = Rng::from_u64(12);
  EXPECT_THROW(hybrid_encrypt(Bytes(), key1024().pub, rng), InvalidArgument);
  const Envelope env = hybrid_encrypt(as_bytes("lab result"), key1024().pub, rng);
  EXPECT_THROW(hybrid_decrypt(env, other1024()), UnwrapError);
  EXPECT_THROW(hybrid_decrypt(env, other1024().pri), UnwrapError);

  Envelope bad_digest = env;
  bad_digest.digest[0] ^= 1;
  EXPECT_THROW(hybrid_decrypt(bad_digest, key1024()), IntegrityError);

  Bytes wire = encode_envelope(env);
  EXPECT_THROW(decode_envelope(Bytes(wire.begin(), wire.end() - 1)), FormatError);
  wire.push_back(0);
  EXPECT_THROW(decode_envelope(wire), FormatError);
  wire.pop_back();
  wire[0] = 'X';
  EXPECT_THROW(decode_envelope(wire), FormatError);
  wire[0] = 'M';
  wire[4] = 0x7f;
  EXPECT_THROW(decode_envelope(wire), FormatError);
}

// Every single-bit flip of the wire form is rejected with a typed error.
TEST(Envelope, BitFlipsNeverDecryptSilently) {
  Rng rng = Rng::from_u64(13);
  const Bytes data = {'h', 'b', 'a', '1', 'c'};
  const Bytes wire = encode_envelope(hybrid_encrypt(data, key1024().pub, rng));
  for (std::size_t bit = 0; bit < wire.size() * 8; ++bit) {
    Bytes mutated = wire;
    mutated[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    try {
      const Bytes out = hybrid_decrypt(decode_envelope(mutated), key1024());
      FAIL() << "bit " << bit << " decrypted to " << out.size() << " bytes";
    } catch (const FormatError&) {
    } catch (const UnwrapError&) {
    } catch (const IntegrityError&) {
    }
  }
}
