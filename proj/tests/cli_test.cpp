#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "medledger/cli/bench.hpp"
#include "medledger/cli/commands.hpp"
#include "medledger/cli/report.hpp"
#include "medledger/errors.hpp"
#include "medledger/mpa/rng.hpp"
#include "support/temp_dir.hpp"

using namespace medledger;
using namespace medledger::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Report, CsvRoundTripIsLossless) {
  BenchReport r;
  r.notes = {"host=x", "second note"};
  r.rows.push_back({"twofish", 100, 0.1 + 0.2, 1.0 / 3.0, std::nullopt, 5});
  r.rows.push_back({"fetch+decrypt", 10, std::nullopt, std::nullopt, 6.02214076e-23, 12345});
  r.rows.push_back({"hybrid", 500, 1e300, 5e-324, std::nullopt, 7});
  const std::string csv = write_csv(r);
  EXPECT_EQ(read_csv(csv), r);
  EXPECT_NE(csv.find(kCsvHeader), std::string::npos);

  mpa::Rng rng = mpa::Rng::from_u64(60);
  for (int i = 0; i < 200; ++i) {
    BenchReport q;
    std::uint64_t bits = rng.next_u64() & 0x7FEFFFFFFFFFFFFFull;
    double v;
    std::memcpy(&v, &bits, sizeof v);
    q.rows.push_back({"x", rng.next_u64(), v, std::nullopt, v, 1});
    ASSERT_EQ(read_csv(write_csv(q)), q);
  }
}

TEST(Report, CsvRejectsBadInput) {
  BenchReport r;
  r.rows.push_back({"a,b", 1, 1.0, 1.0, std::nullopt, 1});
  EXPECT_THROW(write_csv(r), InvalidArgument);
  EXPECT_THROW(read_csv("nonsense\n"), FormatError);
  EXPECT_THROW(read_csv(std::string(kCsvHeader) + "\nx,1,2\n"), FormatError);
  EXPECT_THROW(read_csv(std::string(kCsvHeader) + "\nx,abc,1,1,,1\n"), FormatError);
  EXPECT_THROW(read_csv(""), FormatError);
}

TEST(Report, MedianAndSpearman) {
  EXPECT_EQ(median({3, 1, 2}), 2);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median({}), InvalidArgument);
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{10, 20, 30, 40, 50}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{5, 4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{1, 1, 1, 1, 1}), 0.0);
  // One adjacent swap out of five: 1 - 6*2/(5*24) = 0.9.
  EXPECT_NEAR(spearman(x, std::vector<double>{1, 2, 4, 3, 5}), 0.9, 1e-12);
}

TEST(Bench, ParseCounts) {
  EXPECT_EQ(parse_counts("10..100"), (std::vector<std::size_t>{10, 20, 30, 40, 50, 60, 70, 80, 90, 100}));
  EXPECT_EQ(parse_counts("1..5", 2), (std::vector<std::size_t>{1, 3, 5}));
  EXPECT_EQ(parse_counts("3,7"), (std::vector<std::size_t>{3, 7}));
  EXPECT_THROW(parse_counts("0"), InvalidArgument);
  EXPECT_THROW(parse_counts("0..10"), InvalidArgument);
  EXPECT_THROW(parse_counts("5..1"), InvalidArgument);
  EXPECT_THROW(parse_counts("x"), InvalidArgument);
  EXPECT_THROW(parse_counts(""), InvalidArgument);
}

TEST(Bench, BlockwiseRsaRoundTrip) {
  mpa::Rng rng = mpa::Rng::from_u64(61);
  const auto keys = rsa::keygen(512, rng);
  for (std::size_t n : {0u, 1u, 62u, 63u, 64u, 65u, 1000u}) {
    Bytes data(n);
    rng.fill(data);
    if (n > 0) data[0] = 0;  // leading zero bytes must survive
    EXPECT_EQ(rsa_blockwise_decrypt(rsa_blockwise_encrypt(data, keys.pub), keys.pri), data);
  }
  EXPECT_THROW(rsa_blockwise_decrypt(Bytes(9), keys.pri), FormatError);
}

TEST(Bench, SmallSizeRun) {
  SizeBenchConfig config;
  config.sizes_kb = {1, 2};
  config.reps = 3;
  config.key_bits = 512;
  const BenchReport r = run_size_bench(config);
  ASSERT_EQ(r.rows.size(), 8u);
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.encrypt_s && row.decrypt_s);
    EXPECT_FALSE(row.latency_s);
    EXPECT_EQ(row.reps, 3u);
  }
  EXPECT_EQ(read_csv(write_csv(r)), r);
}

TEST(Bench, SmallLoadRun) {
  LoadBenchConfig config;
  config.users = {1, 4};
  config.duration_s = 0.2;
  config.record_kb = 4;
  config.records = 2;
  config.key_bits = 512;
  const BenchReport r = run_load_bench(config);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.latency_s);
    EXPECT_GE(row.reps, row.size_or_users);
  }
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"keygen"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"bench", "load", "--users", "0"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"bench", "load", "--users", "5,0"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"bench", "size", "--reps", "0"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"keygen", "--id", "a", "--bits", "1000", "--out", "/tmp"}).code, kExitUsage);
  const Result help = run_cli({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("Exit codes"), std::string::npos);
}

TEST(Cli, EndToEndWorkflow) {
  TempDir dir;
  const std::string keys = (dir / "keys").string(), chain = (dir / "chain").string();
  auto keygen = [&](const std::string& id, const std::string& role, const std::string& seed) {
    return run_cli({"--seed", seed, "keygen", "--id", id, "--role", role, "--bits", "512", "--out", keys});
  };
  ASSERT_EQ(keygen("pat", "patient", "1").code, kExitOk);
  ASSERT_EQ(keygen("clinic", "institution", "2").code, kExitOk);
  ASSERT_EQ(keygen("insurer", "third-party", "3").code, kExitOk);
  // No silent overwrite.
  EXPECT_EQ(keygen("pat", "patient", "4").code, kExitError);
  EXPECT_EQ(run_cli({"keygen", "--id", "pat", "--bits", "512", "--out", keys, "--force", "--seed", "1"}).code, kExitOk);

  write_text(dir / "rec.txt", "glucose 5.4 mmol/L");
  const std::string env = (dir / "rec.env").string();
  ASSERT_EQ(run_cli({"encrypt", "--in", (dir / "rec.txt").string(), "--to", keys + "/clinic.pub", "--out", env}).code,
            kExitOk);
  ASSERT_EQ(run_cli({"decrypt", "--in", env, "--key", keys + "/clinic.key", "--pub", keys + "/clinic.pub", "--out",
                 (dir / "back.txt").string()})
                .code,
            kExitOk);
  EXPECT_EQ(read_text(dir / "back.txt"), "glucose 5.4 mmol/L");

  const Result wrong = run_cli({"decrypt", "--in", env, "--key", keys + "/pat.key", "--out", (dir / "x").string()});
  EXPECT_EQ(wrong.code, kExitUnwrap);
  EXPECT_NE(wrong.err.find("UnwrapError"), std::string::npos);
  EXPECT_EQ(run_cli({"decrypt", "--in", env, "--key", keys + "/pat.key", "--pub", keys + "/pat.pub", "--out",
                 (dir / "x").string()})
                .code,
            kExitUnwrap);

  ASSERT_EQ(run_cli({"store", "--chain", chain, "--record-id", "lab1", "--owner", "pat", "--in", env, "--ca", keys}).code,
            kExitOk);
  EXPECT_EQ(run_cli({"store", "--chain", chain, "--record-id", "lab2", "--owner", "ghost", "--in", env, "--ca", keys}).code,
            kExitNotFound);
  write_text(dir / "junk.env", "not an envelope");
  EXPECT_EQ(run_cli({"store", "--chain", chain, "--record-id", "j", "--owner", "pat", "--in", (dir / "junk.env").string()})
                .code,
            kExitIntegrity);

  auto fetch = [&](const std::string& as, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"fetch", "--chain", chain, "--record-id", "lab1", "--as", as, "--ca", keys};
    args.insert(args.end(), extra.begin(), extra.end());
    return run_cli(args);
  };
  EXPECT_EQ(fetch("pat").code, kExitOk);
  EXPECT_EQ(fetch("insurer").code, kExitPermissionDenied);
  EXPECT_EQ(fetch("clinic").code, kExitPermissionDenied);
  EXPECT_EQ(fetch("insurer", {"--emergency"}).code, kExitPermissionDenied);
  const std::string plain_out = (dir / "fetched.txt").string();
  EXPECT_EQ(fetch("clinic", {"--emergency", "--key", keys + "/clinic.key", "--out", plain_out}).code, kExitOk);
  EXPECT_EQ(read_text(plain_out), "glucose 5.4 mmol/L");
  EXPECT_EQ(fetch("ghost").code, kExitPermissionDenied);
  EXPECT_EQ(run_cli({"fetch", "--chain", chain, "--record-id", "nope", "--as", "pat", "--ca", keys}).code, kExitNotFound);

  auto grant = [&](const std::string& cmd, const std::string& to, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{cmd, "--chain", chain, "--ca", keys, "--record-id", "lab1", "--to", to};
    args.insert(args.end(), extra.begin(), extra.end());
    return run_cli(args);
  };
  EXPECT_EQ(grant("grant", "insurer", {"--as", "clinic"}).code, kExitPermissionDenied);
  EXPECT_EQ(grant("grant", "nobody").code, kExitNotFound);
  ASSERT_EQ(grant("grant", "insurer").code, kExitOk);
  EXPECT_EQ(fetch("insurer").code, kExitOk);
  ASSERT_EQ(grant("revoke", "insurer").code, kExitOk);
  EXPECT_EQ(fetch("insurer").code, kExitPermissionDenied);
  EXPECT_EQ(grant("revoke", "insurer").code, kExitNotFound);

  const std::string audit = read_text(dir / "chain" / "audit.log");
  EXPECT_NE(audit.find("insurer\tread\tlab1\tpat\tnormal\tALLOW\tgrant"), std::string::npos);
  EXPECT_NE(audit.find("ghost\tread\tlab1\tpat\tnormal\tDENY\tunregistered"), std::string::npos);

  Result v = run_cli({"verify", "--chain", chain});
  EXPECT_EQ(v.code, kExitOk);
  EXPECT_EQ(v.out, "Valid, 1 blocks\n");

  Bytes log = read_file((dir / "chain" / "chain.log").string());
  log[30] ^= 0x10;
  write_file_atomic((dir / "chain" / "chain.log").string(), log);
  v = run_cli({"verify", "--chain", chain});
  EXPECT_EQ(v.code, kExitIntegrity);
  EXPECT_EQ(v.out, "Invalid at block 0\n");
  EXPECT_EQ(run_cli({"store", "--chain", chain, "--record-id", "lab3", "--owner", "pat", "--in", env}).code,
            kExitIntegrity);
  EXPECT_EQ(run_cli({"verify", "--chain", (dir / "missing").string()}).code, kExitNotFound);
}

TEST(Cli, BenchWritesCsv) {
  TempDir dir;
  const std::string csv = (dir / "size.csv").string();
  const Result r = run_cli({"bench", "size", "--sizes", "1,2", "--reps", "1", "--bits", "512", "--schemes",
                        "twofish,hybrid", "--out", csv});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  const BenchReport report = read_csv(read_text(csv));
  EXPECT_EQ(report.rows.size(), 4u);
  EXPECT_FALSE(report.notes.empty());
  EXPECT_EQ(run_cli({"bench", "size", "--schemes", "des"}).code, kExitUsage);

  const Result load = run_cli({"bench", "load", "--users", "1,2", "--duration", "0.1", "--record-kb", "1", "--bits",
                           "512"});
  EXPECT_EQ(load.code, kExitOk);
  EXPECT_EQ(read_csv(load.out).rows.size(), 2u);
}
