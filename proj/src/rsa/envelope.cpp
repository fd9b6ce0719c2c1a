#include "medledger/rsa/envelope.hpp"

#include <algorithm>
#include <string_view>

#include "medledger/errors.hpp"
#include "medledger/ledger/sha256.hpp"
#include "medledger/twofish/cbc.hpp"

namespace medledger::rsa {

namespace {

constexpr std::string_view kMagic = "MLEN";

}  // namespace

Bytes encode_envelope(const Envelope& env) {
  Bytes out(kMagic.begin(), kMagic.end());
  out.reserve(4 + 1 + 32 + 4 + env.wrapped_key.size() + 16 + 8 + env.payload.size() + 32);
  out.push_back(env.version);
  out.insert(out.end(), env.fingerprint.begin(), env.fingerprint.end());
  put_u32(out, static_cast<std::uint32_t>(env.wrapped_key.size()));
  out.insert(out.end(), env.wrapped_key.begin(), env.wrapped_key.end());
  out.insert(out.end(), env.iv.begin(), env.iv.end());
  put_u64(out, env.payload.size());
  out.insert(out.end(), env.payload.begin(), env.payload.end());
  out.insert(out.end(), env.digest.begin(), env.digest.end());
  return out;
}

Envelope decode_envelope(ByteView bytes) {
  ByteReader in(bytes);
  auto magic = in.take(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) throw FormatError("not an envelope (bad magic)");
  Envelope env;
  env.version = in.u8();
  if (env.version != kEnvelopeVersion) throw FormatError("unsupported envelope version");
  env.fingerprint = in.take_array<32>();
  auto wrapped = in.take(in.u32());
  env.wrapped_key.assign(wrapped.begin(), wrapped.end());
  env.iv = in.take_array<16>();
  const std::uint64_t payload_len = in.u64();
  if (payload_len > in.remaining()) throw FormatError("truncated input");
  auto payload = in.take(static_cast<std::size_t>(payload_len));
  env.payload.assign(payload.begin(), payload.end());
  env.digest = in.take_array<32>();
  in.expect_done("envelope");
  return env;
}

Envelope hybrid_encrypt(ByteView data, const RsaPublicKey& receiver, mpa::Rng& rng) {
  if (data.empty()) throw InvalidArgument("hybrid_encrypt needs nonempty data");
  SessionKey session{};
  rng.fill(session);
  Envelope env;
  rng.fill(env.iv);
  env.fingerprint = fingerprint(receiver);
  env.payload = twofish::cbc_encrypt(twofish::TwofishKey::from_bytes(session), env.iv, data);
  env.wrapped_key = wrap_session_key(session, receiver, rng);
  env.digest = ledger::sha256(data);
  return env;
}

Bytes hybrid_decrypt(const Envelope& env, const RsaPrivateKey& receiver) {
  const SessionKey session = unwrap_session_key(env.wrapped_key, receiver);
  Bytes data = twofish::cbc_decrypt(twofish::TwofishKey::from_bytes(session), env.iv, env.payload);
  if (ledger::sha256(data) != env.digest) throw IntegrityError("plaintext digest mismatch");
  return data;
}

Bytes hybrid_decrypt(const Envelope& env, const RsaKeyPair& receiver) {
  if (env.fingerprint != fingerprint(receiver.pub)) throw UnwrapError("envelope is addressed to a different key");
  return hybrid_decrypt(env, receiver.pri);
}

}  // namespace medledger::rsa
