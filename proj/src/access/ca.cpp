#include "medledger/access/ca.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include "medledger/errors.hpp"

namespace medledger::access {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Patient: return "patient";
    case Role::MedicalInstitution: return "institution";
    case Role::ThirdParty: return "third-party";
    case Role::CA: return "ca";
  }
  return "unknown";
}

Role parse_role(std::string_view text) {
  if (text == "patient") return Role::Patient;
  if (text == "institution" || text == "medical-institution") return Role::MedicalInstitution;
  if (text == "third-party" || text == "thirdparty") return Role::ThirdParty;
  if (text == "ca") return Role::CA;
  throw InvalidArgument("unknown role '" + std::string(text) + "'");
}

bool is_valid_id(std::string_view id) {
  if (id.empty() || id.size() > 255) return false;
  for (char c : id) {
    if (c <= ' ' || c > '~' || c == '#') return false;
  }
  return true;
}

IssuedKeys CertificateAuthority::issue_keypair(const std::string& id, Role role, std::size_t bits, mpa::Rng& rng) {
  if (!is_valid_id(id)) throw InvalidArgument("invalid principal id '" + id + "'");
  {
    std::shared_lock lock(mutex_);
    if (registry_.contains(id)) throw DuplicateId("principal '" + id + "' is already registered");
  }
  rsa::RsaKeyPair keys = rsa::keygen(bits, rng);
  Principal principal = register_principal(id, role, keys.pub);
  return {std::move(principal), std::move(keys)};
}

Principal CertificateAuthority::register_principal(const std::string& id, Role role, const rsa::RsaPublicKey& pub) {
  if (!is_valid_id(id)) throw InvalidArgument("invalid principal id '" + id + "'");
  Principal principal{id, role, rsa::fingerprint(pub)};
  std::unique_lock lock(mutex_);
  auto [it, inserted] = registry_.try_emplace(id, Entry{principal, pub});
  if (!inserted) throw DuplicateId("principal '" + id + "' is already registered");
  return principal;
}

void CertificateAuthority::revoke(const std::string& id) {
  std::unique_lock lock(mutex_);
  if (registry_.erase(id) == 0) throw NotFound("no principal '" + id + "'");
}

std::optional<Principal> CertificateAuthority::lookup(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = registry_.find(id);
  if (it == registry_.end()) return std::nullopt;
  return it->second.principal;
}

std::optional<rsa::RsaPublicKey> CertificateAuthority::public_key(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = registry_.find(id);
  if (it == registry_.end()) return std::nullopt;
  return it->second.pub;
}

bool CertificateAuthority::is_registered(const Principal& p) const {
  std::shared_lock lock(mutex_);
  auto it = registry_.find(p.id);
  return it != registry_.end() && it->second.principal == p;
}

std::size_t CertificateAuthority::size() const {
  std::shared_lock lock(mutex_);
  return registry_.size();
}

void CertificateAuthority::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [id, entry] : registry_) {
      out << id << '\t' << to_string(entry.principal.role) << '\t' << to_hex(rsa::encode_public_key(entry.pub))
          << '\n';
    }
  }
  const std::string text = out.str();
  write_file_atomic(path.string(), as_bytes(text));
}

void CertificateAuthority::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id, role, key_hex;
    if (!std::getline(fields, id, '\t') || !std::getline(fields, role, '\t') || !std::getline(fields, key_hex)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed registry line");
    }
    register_principal(id, parse_role(role), rsa::decode_public_key(from_hex(key_hex)));
  }
}

}  // namespace medledger::access
