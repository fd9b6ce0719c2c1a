#pragma once

#include <memory>

#include "medledger/bytes.hpp"

namespace medledger::ledger {

/// FIPS 180-4 SHA-256.
Digest sha256(ByteView data);

/// Incremental form for hashing data that arrives in pieces.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(Sha256&&) noexcept;
  Sha256& operator=(Sha256&&) noexcept;

  Sha256& update(ByteView data);
  /// Finishes the hash; the object must not be updated afterwards.
  Digest finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace medledger::ledger
