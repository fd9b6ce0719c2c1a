#include "medledger/twofish/cbc.hpp"

#include <algorithm>

#include "medledger/errors.hpp"

namespace medledger::twofish {

Bytes cbc_encrypt(const KeySchedule& ks, const Block& iv, ByteView data) {
  const std::size_t pad = kBlockSize - data.size() % kBlockSize;
  Bytes out(data.size() + pad);
  Block chain = iv;
  for (std::size_t off = 0; off < out.size(); off += kBlockSize) {
    Block block{};
    for (std::size_t i = 0; i < kBlockSize; ++i) {
      std::uint8_t p = off + i < data.size() ? data[off + i] : static_cast<std::uint8_t>(pad);
      block[i] = p ^ chain[i];
    }
    chain = encrypt_block(ks, block);
    std::copy(chain.begin(), chain.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
  }
  return out;
}

Bytes cbc_encrypt(const TwofishKey& key, const Block& iv, ByteView data) {
  return cbc_encrypt(KeySchedule(key), iv, data);
}

Bytes cbc_decrypt(const KeySchedule& ks, const Block& iv, ByteView data) {
  if (data.empty() || data.size() % kBlockSize != 0) {
    throw IntegrityError("CBC ciphertext length is not a positive multiple of the block size");
  }
  Bytes out(data.size());
  Block chain = iv;
  for (std::size_t off = 0; off < data.size(); off += kBlockSize) {
    Block block{};
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(off), kBlockSize, block.begin());
    Block plain = decrypt_block(ks, block);
    for (std::size_t i = 0; i < kBlockSize; ++i) out[off + i] = plain[i] ^ chain[i];
    chain = block;
  }

  const std::uint8_t pad = out.back();
  if (pad == 0 || pad > kBlockSize) throw IntegrityError("invalid CBC padding");
  for (std::size_t i = out.size() - pad; i < out.size(); ++i) {
    if (out[i] != pad) throw IntegrityError("invalid CBC padding");
  }
  out.resize(out.size() - pad);
  return out;
}

Bytes cbc_decrypt(const TwofishKey& key, const Block& iv, ByteView data) {
  return cbc_decrypt(KeySchedule(key), iv, data);
}

}  // namespace medledger::twofish
