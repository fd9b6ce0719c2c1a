#include <gtest/gtest.h>

#include <cctype>
#include <fstream>

#include "medledger/access/ca.hpp"
#include "medledger/access/policy.hpp"
#include "medledger/errors.hpp"
#include "medledger/ledger/sha256.hpp"
#include "support/permission_fixture.hpp"
#include "support/temp_dir.hpp"

using namespace medledger;
using namespace medledger::access;

class PermissionTable : public ::testing::TestWithParam<fixture::Cell> {};

TEST_P(PermissionTable, CellHolds) { EXPECT_EQ(fixture::check(GetParam()), ""); }

std::string cell_name(const ::testing::TestParamInfo<fixture::Cell>& info) {
  const fixture::Cell& c = info.param;
  std::string name = std::string(to_string(c.action)) + (c.own ? "_own_" : "_others_") + std::string(to_string(c.role));
  for (char& ch : name)
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  return name;
}

INSTANTIATE_TEST_SUITE_P(AllCells, PermissionTable, ::testing::ValuesIn(fixture::table()), cell_name);

namespace {

struct Principals {
  mpa::Rng rng = mpa::Rng::from_u64(50);
  CertificateAuthority ca;
  IssuedKeys pat, clinic, insurer, admin;
  Principals() {
    pat = ca.issue_keypair("pat", Role::Patient, 512, rng);
    clinic = ca.issue_keypair("clinic", Role::MedicalInstitution, 512, rng);
    insurer = ca.issue_keypair("insurer", Role::ThirdParty, 512, rng);
    admin = ca.issue_keypair("admin", Role::CA, 512, rng);
  }
};

}  // namespace

TEST(CertificateAuthority, IssueAndLookup) {
  Principals s;
  EXPECT_EQ(s.ca.size(), 4u);
  EXPECT_EQ(s.ca.lookup("pat")->fingerprint, ledger::sha256(rsa::encode_public_key(s.pat.keys.pub)));
  EXPECT_EQ(s.ca.public_key("clinic"), s.clinic.keys.pub);
  EXPECT_NE(s.pat.keys.pub.n, s.clinic.keys.pub.n);
  EXPECT_THROW(s.ca.issue_keypair("pat", Role::Patient, 512, s.rng), DuplicateId);
  EXPECT_THROW(s.ca.issue_keypair("bad id", Role::Patient, 512, s.rng), InvalidArgument);
  EXPECT_FALSE(s.ca.lookup("nobody"));
}

TEST(CertificateAuthority, RegistrationMustMatchExactly) {
  Principals s;
  Principal forged = s.pat.principal;
  EXPECT_TRUE(s.ca.is_registered(forged));
  forged.role = Role::MedicalInstitution;
  EXPECT_FALSE(s.ca.is_registered(forged));
  forged = s.pat.principal;
  forged.fingerprint[0] ^= 1;
  EXPECT_FALSE(s.ca.is_registered(forged));
  s.ca.revoke("pat");
  EXPECT_FALSE(s.ca.is_registered(s.pat.principal));
  EXPECT_THROW(s.ca.revoke("pat"), NotFound);
}

TEST(CertificateAuthority, SaveLoadRoundTrip) {
  Principals s;
  TempDir dir;
  s.ca.save(dir / "principals.tsv");
  CertificateAuthority loaded;
  loaded.load(dir / "principals.tsv");
  EXPECT_EQ(loaded.size(), 4u);
  for (const char* id : {"pat", "clinic", "insurer", "admin"}) {
    EXPECT_EQ(loaded.lookup(id), s.ca.lookup(id));
    EXPECT_EQ(loaded.public_key(id), s.ca.public_key(id));
  }
  CertificateAuthority empty;
  empty.load(dir / "missing.tsv");
  EXPECT_EQ(empty.size(), 0u);
  std::ofstream(dir / "broken.tsv") << "only-one-field\n";
  EXPECT_THROW(empty.load(dir / "broken.tsv"), FormatError);
}

TEST(CertificateAuthority, RolesParse) {
  for (Role r : kAllRoles) EXPECT_EQ(parse_role(to_string(r)), r);
  EXPECT_EQ(parse_role("medical-institution"), Role::MedicalInstitution);
  EXPECT_THROW(parse_role("doctor"), InvalidArgument);
}

TEST(PermissionPolicy, MatrixIsTotal) {
  const PermissionMatrix m = PermissionMatrix::standard();
  int grant_or_emergency = 0;
  for (Role r : kAllRoles) {
    for (Action a : {Action::Read, Action::Write}) {
      EXPECT_EQ(m.at(r, a, Relation::Own), Requirement::NoPermissionNeeded);
      if (m.at(r, a, Relation::ThirdPartyData) == Requirement::NeedGrantOrEmergency) ++grant_or_emergency;
    }
  }
  EXPECT_EQ(grant_or_emergency, 1);
}

TEST(PermissionPolicy, UnregisteredDenied) {
  Principals s;
  PermissionPolicy policy(s.ca, PermissionMatrix::standard());
  const Principal stranger{"stranger", Role::MedicalInstitution, {}};
  const auto d = policy.check(stranger, Action::Read, {"r", "stranger"}, true, 0);
  EXPECT_FALSE(d.allowed);
  EXPECT_EQ(d.reason, Reason::Unregistered);
  EXPECT_EQ(policy.audit_log().size(), 1u);
}

TEST(PermissionPolicy, GrantMatchingRules) {
  Principals s;
  PermissionPolicy policy(s.ca, PermissionMatrix::standard());
  const RecordRef rec{"r1", "pat"};
  policy.grant(s.pat.principal, "insurer", rec, Action::Read, std::chrono::minutes(1), 0);
  EXPECT_TRUE(policy.check(s.insurer.principal, Action::Read, rec, false, 10).allowed);
  // Grant is for read only, for r1 only, for insurer only.
  EXPECT_FALSE(policy.check(s.insurer.principal, Action::Write, rec, false, 10).allowed);
  EXPECT_FALSE(policy.check(s.insurer.principal, Action::Read, {"r2", "pat"}, false, 10).allowed);
  EXPECT_FALSE(policy.check(s.clinic.principal, Action::Read, rec, false, 10).allowed);
}

TEST(PermissionPolicy, WhoMayGrant) {
  Principals s;
  PermissionPolicy policy(s.ca, PermissionMatrix::standard());
  const RecordRef rec{"r1", "pat"};
  EXPECT_THROW(policy.grant(s.clinic.principal, "insurer", rec, Action::Read, std::chrono::minutes(1), 0),
               PermissionDenied);
  EXPECT_NO_THROW(policy.grant(s.admin.principal, "insurer", rec, Action::Read, std::chrono::minutes(1), 0));
  EXPECT_THROW(policy.grant(s.pat.principal, "nobody", rec, Action::Read, std::chrono::minutes(1), 0), NotFound);
  EXPECT_THROW(policy.grant(s.pat.principal, "insurer", rec, Action::Read, std::chrono::milliseconds(0), 0),
               InvalidArgument);
  const GrantRecord g = policy.grants().front();
  EXPECT_THROW(policy.revoke(s.insurer.principal, g, rec), PermissionDenied);
  policy.revoke(s.pat.principal, g, rec);
  EXPECT_THROW(policy.revoke(s.pat.principal, g, rec), NotFound);
}

TEST(PermissionPolicy, GrantsAndAuditPersist) {
  Principals s;
  TempDir dir;
  {
    PermissionPolicy policy(s.ca, PermissionMatrix::standard());
    policy.attach_audit_file(dir / "audit.log");
    policy.grant(s.pat.principal, "insurer", {"r1", "pat"}, Action::Write, std::chrono::hours(1), 100);
    policy.check(s.insurer.principal, Action::Write, {"r1", "pat"}, false, 200);
    policy.check(s.clinic.principal, Action::Read, {"r1", "pat"}, true, 300);
    policy.save_grants(dir / "grants.tsv");
  }
  PermissionPolicy reloaded(s.ca, PermissionMatrix::standard());
  reloaded.load_grants(dir / "grants.tsv");
  ASSERT_EQ(reloaded.grants().size(), 1u);
  EXPECT_EQ(reloaded.grants()[0], (GrantRecord{"insurer", "r1", Action::Write, 100 + 3'600'000}));

  std::ifstream audit(dir / "audit.log");
  std::string l1, l2, extra;
  std::getline(audit, l1);
  std::getline(audit, l2);
  EXPECT_FALSE(std::getline(audit, extra));
  EXPECT_EQ(l1, "200\tinsurer\twrite\tr1\tpat\tnormal\tALLOW\tgrant");
  EXPECT_EQ(l2, "300\tclinic\tread\tr1\tpat\temergency\tALLOW\temergency");
}
