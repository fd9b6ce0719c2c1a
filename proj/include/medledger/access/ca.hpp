#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "medledger/bytes.hpp"
#include "medledger/mpa/rng.hpp"
#include "medledger/rsa/rsa.hpp"

namespace medledger::access {

enum class Role { Patient, MedicalInstitution, ThirdParty, CA };

inline constexpr Role kAllRoles[] = {Role::Patient, Role::MedicalInstitution, Role::ThirdParty, Role::CA};

std::string_view to_string(Role role);
/// Accepts "patient", "institution" / "medical-institution", "third-party", "ca".
Role parse_role(std::string_view text);

struct Principal {
  std::string id;
  Role role = Role::Patient;
  Digest fingerprint{};
  friend bool operator==(const Principal&, const Principal&) = default;
};

struct IssuedKeys {
  Principal principal;
  rsa::RsaKeyPair keys;
};

/// Principal ids are nonempty, at most 255 bytes, printable ASCII without
/// whitespace or '#'.
bool is_valid_id(std::string_view id);

/// Certificate authority: issues key pairs and keeps the registry of
/// principals and their public keys. Private keys are handed back to the
/// caller once and never stored.
class CertificateAuthority {
 public:
  CertificateAuthority() = default;

  /// Throws DuplicateId if `id` is already registered.
  IssuedKeys issue_keypair(const std::string& id, Role role, std::size_t bits, mpa::Rng& rng);
  /// Registers an externally generated public key.
  Principal register_principal(const std::string& id, Role role, const rsa::RsaPublicKey& pub);
  void revoke(const std::string& id);

  std::optional<Principal> lookup(const std::string& id) const;
  std::optional<rsa::RsaPublicKey> public_key(const std::string& id) const;
  /// Same id, role and fingerprint as a current registration.
  bool is_registered(const Principal& p) const;
  std::size_t size() const;

  /// One principal per line: id <TAB> role <TAB> hex(public key encoding).
  void save(const std::filesystem::path& path) const;
  /// Adds every principal listed in `path`; a missing file adds nothing.
  void load(const std::filesystem::path& path);

 private:
  struct Entry {
    Principal principal;
    rsa::RsaPublicKey pub;
  };

  mutable std::shared_mutex mutex_;
  std::map<std::string, Entry> registry_;
};

}  // namespace medledger::access
