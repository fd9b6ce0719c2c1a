#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "medledger/access/ca.hpp"

namespace medledger::access {

enum class Action { Read, Write };
enum class Relation { Own, ThirdPartyData };
enum class Requirement { NoPermissionNeeded, NeedGrant, NeedGrantOrEmergency };

std::string_view to_string(Action action);
Action parse_action(std::string_view text);
std::string_view to_string(Requirement req);

/// Requirement per (role, action, ownership relation). Total by construction.
class PermissionMatrix {
 public:
  /// The access-permission table for healthcare records:
  ///   own records, read or write:  no permission needed, every role
  ///   others' records, read:       grant needed; medical institutions may
  ///                                also read in an emergency
  ///   others' records, write:      grant needed, every role
  static PermissionMatrix standard();

  Requirement at(Role role, Action action, Relation relation) const;
  void set(Role role, Action action, Relation relation, Requirement req);

 private:
  static std::size_t slot(Role role, Action action, Relation relation);
  std::array<Requirement, 4 * 2 * 2> cells_{};
};

enum class Reason { Owner, Policy, Grant, Emergency, Unregistered, NoGrant };
std::string_view to_string(Reason reason);

struct Decision {
  bool allowed = false;
  Reason reason = Reason::NoGrant;

  static Decision allow(Reason r) { return {true, r}; }
  static Decision deny(Reason r) { return {false, r}; }
  friend bool operator==(const Decision&, const Decision&) = default;
};

/// Record as seen by the policy: its id and the principal that owns it.
struct RecordRef {
  std::string record_id;
  std::string owner_id;
};

struct GrantRecord {
  std::string grantee_id;
  std::string record_id;
  Action action = Action::Read;
  std::int64_t expiry_ms = 0;
  friend bool operator==(const GrantRecord&, const GrantRecord&) = default;
};

struct AuditEntry {
  std::int64_t time_ms = 0;
  std::string requester_id;
  Action action = Action::Read;
  std::string record_id;
  std::string owner_id;
  bool emergency = false;
  Decision decision;
};

std::string format_audit_line(const AuditEntry& entry);

/// Decides access requests against the matrix and the set of live grants.
/// Every decision is appended to the audit log (and to the audit file, when
/// one is attached). check() may be called concurrently; grant and revoke
/// are serialized.
class PermissionPolicy {
 public:
  explicit PermissionPolicy(const CertificateAuthority& ca, PermissionMatrix matrix = PermissionMatrix::standard());

  Decision check(const Principal& requester, Action action, const RecordRef& record, bool emergency,
                 std::int64_t now_ms);

  /// Granter must be a registered owner of the record or a CA; otherwise
  /// PermissionDenied. Grantee must be registered (NotFound otherwise).
  GrantRecord grant(const Principal& granter, const std::string& grantee_id, const RecordRef& record, Action action,
                    std::chrono::milliseconds ttl, std::int64_t now_ms);
  /// Same authority rule as grant(). Throws NotFound if no such grant.
  void revoke(const Principal& granter, const GrantRecord& g, const RecordRef& record);

  const PermissionMatrix& matrix() const { return matrix_; }
  std::vector<GrantRecord> grants() const;
  std::vector<AuditEntry> audit_log() const;

  /// Grants as text, one per line: grantee <TAB> record <TAB> action <TAB> expiry-ms.
  void save_grants(const std::filesystem::path& path) const;
  void load_grants(const std::filesystem::path& path);
  /// Subsequent decisions are also appended to `path`, one line each.
  void attach_audit_file(const std::filesystem::path& path);

 private:
  void authorize_granter(const Principal& granter, const RecordRef& record) const;
  void append_audit(const AuditEntry& entry);

  const CertificateAuthority& ca_;
  PermissionMatrix matrix_;
  mutable std::shared_mutex grants_mutex_;
  std::vector<GrantRecord> grants_;
  mutable std::mutex audit_mutex_;
  std::vector<AuditEntry> audit_;
  std::optional<std::filesystem::path> audit_file_;
};

}  // namespace medledger::access
