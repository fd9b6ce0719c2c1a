#pragma once

#include "medledger/bytes.hpp"
#include "medledger/twofish/twofish.hpp"

namespace medledger::twofish {

/// CBC with PKCS#7 padding. Output is always a nonzero multiple of 16 bytes;
/// empty input yields one full padding block.
Bytes cbc_encrypt(const KeySchedule& ks, const Block& iv, ByteView data);
Bytes cbc_encrypt(const TwofishKey& key, const Block& iv, ByteView data);

/// Throws IntegrityError if the length is not a positive multiple of 16 or
/// the padding does not validate.
Bytes cbc_decrypt(const KeySchedule& ks, const Block& iv, ByteView data);
Bytes cbc_decrypt(const TwofishKey& key, const Block& iv, ByteView data);

}  // namespace medledger::twofish
