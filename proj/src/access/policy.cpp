#include "medledger/access/policy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "medledger/errors.hpp"

namespace medledger::access {

std::string_view to_string(Action action) { return action == Action::Read ? "read" : "write"; }

Action parse_action(std::string_view text) {
  if (text == "read") return Action::Read;
  if (text == "write") return Action::Write;
  throw InvalidArgument("unknown action '" + std::string(text) + "' (use read or write)");
}

std::string_view to_string(Requirement req) {
  switch (req) {
    case Requirement::NoPermissionNeeded: return "no-permission-needed";
    case Requirement::NeedGrant: return "need-grant";
    case Requirement::NeedGrantOrEmergency: return "need-grant-or-emergency";
  }
  return "unknown";
}

std::string_view to_string(Reason reason) {
  switch (reason) {
    case Reason::Owner: return "owner";
    case Reason::Policy: return "policy";
    case Reason::Grant: return "grant";
    case Reason::Emergency: return "emergency";
    case Reason::Unregistered: return "unregistered";
    case Reason::NoGrant: return "no-grant";
  }
  return "unknown";
}

std::size_t PermissionMatrix::slot(Role role, Action action, Relation relation) {
  return static_cast<std::size_t>(role) * 4 + static_cast<std::size_t>(action) * 2 +
         static_cast<std::size_t>(relation);
}

PermissionMatrix PermissionMatrix::standard() {
  PermissionMatrix m;
  for (Role role : kAllRoles) {
    for (Action action : {Action::Read, Action::Write}) {
      m.set(role, action, Relation::Own, Requirement::NoPermissionNeeded);
      m.set(role, action, Relation::ThirdPartyData, Requirement::NeedGrant);
    }
  }
  m.set(Role::MedicalInstitution, Action::Read, Relation::ThirdPartyData, Requirement::NeedGrantOrEmergency);
  return m;
}

Requirement PermissionMatrix::at(Role role, Action action, Relation relation) const {
  return cells_[slot(role, action, relation)];
}

void PermissionMatrix::set(Role role, Action action, Relation relation, Requirement req) {
  cells_[slot(role, action, relation)] = req;
}

std::string format_audit_line(const AuditEntry& e) {
  std::ostringstream out;
  out << e.time_ms << '\t' << e.requester_id << '\t' << to_string(e.action) << '\t' << e.record_id << '\t'
      << e.owner_id << '\t' << (e.emergency ? "emergency" : "normal") << '\t'
      << (e.decision.allowed ? "ALLOW" : "DENY") << '\t' << to_string(e.decision.reason);
  return out.str();
}

PermissionPolicy::PermissionPolicy(const CertificateAuthority& ca, PermissionMatrix matrix)
    : ca_(ca), matrix_(matrix) {}

Decision PermissionPolicy::check(const Principal& requester, Action action, const RecordRef& record, bool emergency,
                                 std::int64_t now_ms) {
  Decision decision = [&] {
    if (!ca_.is_registered(requester)) return Decision::deny(Reason::Unregistered);
    const Relation relation = requester.id == record.owner_id ? Relation::Own : Relation::ThirdPartyData;
    const Requirement req = matrix_.at(requester.role, action, relation);
    if (req == Requirement::NoPermissionNeeded) {
      return Decision::allow(relation == Relation::Own ? Reason::Owner : Reason::Policy);
    }
    {
      std::shared_lock lock(grants_mutex_);
      const bool granted = std::any_of(grants_.begin(), grants_.end(), [&](const GrantRecord& g) {
        return g.grantee_id == requester.id && g.record_id == record.record_id && g.action == action &&
               g.expiry_ms > now_ms;
      });
      if (granted) return Decision::allow(Reason::Grant);
    }
    if (req == Requirement::NeedGrantOrEmergency && emergency && requester.role == Role::MedicalInstitution &&
        action == Action::Read) {
      return Decision::allow(Reason::Emergency);
    }
    return Decision::deny(Reason::NoGrant);
  }();
  append_audit({now_ms, requester.id, action, record.record_id, record.owner_id, emergency, decision});
  return decision;
}

void PermissionPolicy::authorize_granter(const Principal& granter, const RecordRef& record) const {
  if (!ca_.is_registered(granter)) throw PermissionDenied("granter '" + granter.id + "' is not registered");
  if (granter.id != record.owner_id && granter.role != Role::CA) {
    throw PermissionDenied("only the record owner or the CA may change grants on '" + record.record_id + "'");
  }
}

GrantRecord PermissionPolicy::grant(const Principal& granter, const std::string& grantee_id, const RecordRef& record,
                                    Action action, std::chrono::milliseconds ttl, std::int64_t now_ms) {
  authorize_granter(granter, record);
  if (!ca_.lookup(grantee_id)) throw NotFound("no principal '" + grantee_id + "'");
  if (ttl.count() <= 0) throw InvalidArgument("grant ttl must be positive");
  GrantRecord g{grantee_id, record.record_id, action, now_ms + ttl.count()};
  std::unique_lock lock(grants_mutex_);
  grants_.push_back(g);
  return g;
}

void PermissionPolicy::revoke(const Principal& granter, const GrantRecord& g, const RecordRef& record) {
  authorize_granter(granter, record);
  std::unique_lock lock(grants_mutex_);
  auto it = std::remove(grants_.begin(), grants_.end(), g);
  if (it == grants_.end()) throw NotFound("no such grant");
  grants_.erase(it, grants_.end());
}

std::vector<GrantRecord> PermissionPolicy::grants() const {
  std::shared_lock lock(grants_mutex_);
  return grants_;
}

std::vector<AuditEntry> PermissionPolicy::audit_log() const {
  std::lock_guard lock(audit_mutex_);
  return audit_;
}

void PermissionPolicy::save_grants(const std::filesystem::path& path) const {
  std::ostringstream out;
  for (const auto& g : grants()) {
    out << g.grantee_id << '\t' << g.record_id << '\t' << to_string(g.action) << '\t' << g.expiry_ms << '\n';
  }
  const std::string text = out.str();
  write_file_atomic(path.string(), as_bytes(text));
}

void PermissionPolicy::load_grants(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return;
  std::vector<GrantRecord> loaded;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    GrantRecord g;
    std::string action, expiry;
    if (!std::getline(fields, g.grantee_id, '\t') || !std::getline(fields, g.record_id, '\t') ||
        !std::getline(fields, action, '\t') || !std::getline(fields, expiry)) {
      throw FormatError("malformed grant line in " + path.string());
    }
    g.action = parse_action(action);
    try {
      g.expiry_ms = std::stoll(expiry);
    } catch (const std::exception&) {
      throw FormatError("malformed grant expiry in " + path.string());
    }
    loaded.push_back(std::move(g));
  }
  std::unique_lock lock(grants_mutex_);
  grants_.insert(grants_.end(), loaded.begin(), loaded.end());
}

void PermissionPolicy::attach_audit_file(const std::filesystem::path& path) {
  std::lock_guard lock(audit_mutex_);
  audit_file_ = path;
}

void PermissionPolicy::append_audit(const AuditEntry& entry) {
  std::lock_guard lock(audit_mutex_);
  audit_.push_back(entry);
  if (audit_file_) {
    std::ofstream out(*audit_file_, std::ios::app);
    out << format_audit_line(entry) << '\n';
    if (!out) throw StorageError("cannot append to audit log " + audit_file_->string());
  }
}

}  // namespace medledger::access
