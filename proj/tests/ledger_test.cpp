#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "medledger/access/ca.hpp"
#include "medledger/access/policy.hpp"
#include "medledger/errors.hpp"
#include "medledger/ledger/chain.hpp"
#include "medledger/ledger/sha256.hpp"
#include "support/temp_dir.hpp"

using namespace medledger;
using namespace medledger::ledger;
namespace fs = std::filesystem;

namespace {

struct World {
  access::CertificateAuthority ca;
  access::IssuedKeys patient;
  access::IssuedKeys clinic;
  mpa::Rng rng = mpa::Rng::from_u64(31);

  World() {
    patient = ca.issue_keypair("pat", access::Role::Patient, 512, rng);
    clinic = ca.issue_keypair("clinic", access::Role::MedicalInstitution, 512, rng);
  }
};

void flip_byte(const fs::path& p, std::size_t offset, std::uint8_t mask) {
  Bytes data = read_file(p.string());
  data.at(offset) ^= mask;
  std::ofstream(p, std::ios::binary | std::ios::trunc)
      .write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

}  // namespace

TEST(Sha256, Fips180Vectors) {
  EXPECT_EQ(to_hex(sha256(as_bytes(""))), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(to_hex(sha256(as_bytes("abc"))), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(to_hex(sha256(as_bytes("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"))),
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  Sha256 h;
  const std::string chunk(1000, 'a');
  for (int i = 0; i < 1000; ++i) h.update(as_bytes(chunk));
  EXPECT_EQ(to_hex(h.finish()), "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST(Block, CanonicalEncodingLayout) {
  Block b;
  b.index = 1;
  b.timestamp_ms = 2;
  b.record_id = "r";
  b.owner_id = "ow";
  const Bytes enc = canonical_encoding(b);
  EXPECT_EQ(enc.size(), 8u + 8 + 32 + 2 + 1 + 2 + 2 + 32);
  EXPECT_EQ(enc[7], 1);
  EXPECT_EQ(enc[15], 2);
  EXPECT_EQ(enc[49], 1);
  EXPECT_EQ(enc[50], 'r');
  EXPECT_EQ(compute_block_hash(b), sha256(enc));
}

TEST(Chain, AppendLinksAndPersists) {
  TempDir dir;
  World w;
  std::vector<Block> appended;
  {
    Chain chain(dir / "c");
    for (int i = 0; i < 4; ++i) {
      const Bytes env = rsa::encode_envelope(rsa::hybrid_encrypt(Bytes(100, static_cast<std::uint8_t>(i)),
                                                                 w.clinic.keys.pub, w.rng));
      appended.push_back(chain.append_record(env, "rec" + std::to_string(i), "pat", 1000 + i));
    }
    EXPECT_EQ(appended[0].prev_hash, Digest{});
    for (std::size_t i = 1; i < appended.size(); ++i) {
      EXPECT_EQ(appended[i].prev_hash, appended[i - 1].block_hash);
      EXPECT_EQ(appended[i].index, i);
    }
    EXPECT_TRUE(validate_chain(chain).valid);
  }
  Chain reopened(dir / "c");
  EXPECT_EQ(reopened.blocks(), appended);
  const auto r = verify_storage(reopened);
  EXPECT_TRUE(r.valid);
  EXPECT_EQ(r.blocks, 4u);
  EXPECT_TRUE(fs::exists(reopened.index_path()));
}

TEST(Chain, DuplicateIdsGetVersions) {
  TempDir dir;
  Chain chain(dir / "c");
  chain.append_record(as_bytes("v1"), "rec", "pat", 1);
  const Block b2 = chain.append_record(as_bytes("v2"), "rec", "pat", 2);
  const Block b3 = chain.append_record(as_bytes("v3"), "rec", "pat", 3);
  EXPECT_EQ(b2.record_id, "rec#2");
  EXPECT_EQ(b3.record_id, "rec#3");
  EXPECT_EQ(chain.locate("rec")->block_index, 2u);
  EXPECT_EQ(chain.locate("rec#2")->block_index, 1u);
  EXPECT_EQ(chain.read_envelope_bytes("rec#2"), Bytes({'v', '2'}));
  Chain reopened(dir / "c");
  EXPECT_EQ(reopened.locate("rec")->block_index, 2u);
  EXPECT_EQ(reopened.append_record(as_bytes("v4"), "rec", "pat", 4).record_id, "rec#4");
}

TEST(Chain, RejectsBadIds) {
  TempDir dir;
  Chain chain(dir / "c");
  EXPECT_THROW(chain.append_record(as_bytes("x"), "", "pat", 1), InvalidArgument);
  EXPECT_THROW(chain.append_record(as_bytes("x"), "a#1", "pat", 1), InvalidArgument);
  EXPECT_THROW(chain.append_record(as_bytes("x"), "a b", "pat", 1), InvalidArgument);
  EXPECT_THROW(chain.append_record(as_bytes("x"), "a", "", 1), InvalidArgument);
  EXPECT_EQ(chain.size(), 0u);
}

TEST(Chain, TamperedLogDetectedAndAppendRefused) {
  TempDir dir;
  {
    Chain chain(dir / "c");
    for (int i = 0; i < 3; ++i) chain.append_record(as_bytes("e" + std::to_string(i)), "r" + std::to_string(i), "o", 5);
  }
  const fs::path log = dir / "c" / "chain.log";
  const auto one_block = fs::file_size(log) / 3;
  flip_byte(log, one_block + 20, 0x01);  // inside block 1
  Chain chain(dir / "c");
  const auto r = chain.validate();
  EXPECT_FALSE(r.valid);
  EXPECT_EQ(r.first_bad_index, 1u);
  EXPECT_THROW(chain.append_record(as_bytes("more"), "r9", "o", 6), IntegrityError);
}

TEST(Chain, TruncatedLogDetected) {
  TempDir dir;
  {
    Chain chain(dir / "c");
    chain.append_record(as_bytes("a"), "a", "o", 1);
    chain.append_record(as_bytes("b"), "b", "o", 2);
  }
  const fs::path log = dir / "c" / "chain.log";
  fs::resize_file(log, fs::file_size(log) - 1);
  const auto r = Chain(dir / "c").validate();
  EXPECT_FALSE(r.valid);
  EXPECT_EQ(r.first_bad_index, 1u);
}

TEST(Chain, TamperedEnvelopeDetected) {
  TempDir dir;
  Chain chain(dir / "c");
  chain.append_record(as_bytes("payload"), "a", "o", 1);
  const fs::path env = chain.locate("a")->envelope_path;
  flip_byte(env, 0, 0x80);
  EXPECT_THROW(chain.read_envelope_bytes("a"), IntegrityError);
  EXPECT_TRUE(chain.validate().valid);  // log itself is intact
  EXPECT_FALSE(verify_storage(chain).valid);
  fs::remove(env);
  EXPECT_THROW(chain.read_envelope_bytes("a"), IntegrityError);
}

TEST(Chain, IndexIsRebuiltNotTrusted) {
  TempDir dir;
  {
    Chain chain(dir / "c");
    chain.append_record(as_bytes("a"), "a", "o", 1);
    chain.append_record(as_bytes("b"), "b", "o", 2);
  }
  std::ofstream(dir / "c" / "index.tsv", std::ios::trunc) << "a\t1\t/etc/passwd\n";
  Chain chain(dir / "c");
  EXPECT_EQ(chain.read_envelope_bytes("a"), Bytes{'a'});
  EXPECT_EQ(chain.read_envelope_bytes("b"), Bytes{'b'});
}

TEST(Chain, ParseNeverThrowsOnGarbage) {
  mpa::Rng rng = mpa::Rng::from_u64(40);
  for (int i = 0; i < 500; ++i) {
    Bytes junk(rng.uniform_u64(300));
    rng.fill(junk);
    const ParsedLog p = parse_chain_log(junk);
    EXPECT_EQ(p.result.valid, junk.empty());
  }
}

TEST(Chain, ConcurrentAppendsAndReads) {
  TempDir dir;
  Chain chain(dir / "c");
  chain.append_record(as_bytes("seed"), "seed", "o", 0);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 20; ++i) {
        chain.append_record(as_bytes("t" + std::to_string(t) + "-" + std::to_string(i)),
                            "t" + std::to_string(t) + "-" + std::to_string(i), "o", 1);
        EXPECT_EQ(chain.read_envelope_bytes("seed"), Bytes({'s', 'e', 'e', 'd'}));
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(chain.size(), 81u);
  EXPECT_TRUE(chain.validate().valid);
  EXPECT_TRUE(Chain(dir / "c").validate().valid);
}

TEST(Fetch, PolicyThenIntegrity) {
  TempDir dir;
  World w;
  Chain chain(dir / "c");
  const Bytes plain(3000, 0x42);
  chain.append_record(rsa::hybrid_encrypt(plain, w.clinic.keys.pub, w.rng), "lab", "pat", 1);
  access::PermissionPolicy policy(w.ca, access::PermissionMatrix::standard());

  EXPECT_THROW(fetch_record(chain, "nope", w.clinic.principal, policy, false, 10), NotFound);
  EXPECT_THROW(fetch_record(chain, "lab", w.clinic.principal, policy, false, 10), PermissionDenied);
  const rsa::Envelope env = fetch_record(chain, "lab", w.clinic.principal, policy, true, 10);
  EXPECT_EQ(rsa::hybrid_decrypt(env, w.clinic.keys), plain);
  EXPECT_NO_THROW(fetch_record(chain, "lab", w.patient.principal, policy, false, 10));

  policy.grant(w.patient.principal, "clinic", {"lab", "pat"}, access::Action::Read, std::chrono::seconds(1), 10);
  EXPECT_NO_THROW(fetch_record(chain, "lab", w.clinic.principal, policy, false, 500));
  EXPECT_THROW(fetch_record(chain, "lab", w.clinic.principal, policy, false, 1010), PermissionDenied);

  flip_byte(chain.locate("lab")->envelope_path, 10, 0x01);
  EXPECT_THROW(fetch_record(chain, "lab", w.patient.principal, policy, false, 10), IntegrityError);
  EXPECT_EQ(policy.audit_log().size(), 6u);
}
