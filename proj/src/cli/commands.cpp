#include "medledger/cli/commands.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "medledger/access/ca.hpp"
#include "medledger/access/policy.hpp"
#include "medledger/cli/bench.hpp"
#include "medledger/cli/report.hpp"
#include "medledger/errors.hpp"
#include "medledger/ledger/chain.hpp"
#include "medledger/rsa/envelope.hpp"

namespace medledger::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  other error (storage, duplicate id, refused overwrite)\n"
    "  2  usage error or invalid argument\n"
    "  3  permission denied\n"
    "  4  integrity or format failure (tampered chain or envelope)\n"
    "  5  not found (record, principal or file)\n"
    "  6  unwrap failed (wrong private key)";

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const NoInverse*>(&e)) return "NoInverse";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "InvalidArgument";
  if (dynamic_cast<const ArithmeticError*>(&e)) return "ArithmeticError";
  if (dynamic_cast<const FormatError*>(&e)) return "FormatError";
  if (dynamic_cast<const IntegrityError*>(&e)) return "IntegrityError";
  if (dynamic_cast<const UnwrapError*>(&e)) return "UnwrapError";
  if (dynamic_cast<const NotFound*>(&e)) return "NotFound";
  if (dynamic_cast<const PermissionDenied*>(&e)) return "PermissionDenied";
  if (dynamic_cast<const DuplicateId*>(&e)) return "DuplicateId";
  if (dynamic_cast<const StorageError*>(&e)) return "StorageError";
  return "Error";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e)) return kExitUsage;
  if (dynamic_cast<const PermissionDenied*>(&e)) return kExitPermissionDenied;
  if (dynamic_cast<const IntegrityError*>(&e) || dynamic_cast<const FormatError*>(&e)) return kExitIntegrity;
  if (dynamic_cast<const NotFound*>(&e)) return kExitNotFound;
  if (dynamic_cast<const UnwrapError*>(&e)) return kExitUnwrap;
  return kExitError;
}

mpa::Rng make_rng(const std::optional<std::uint64_t>& seed) {
  return seed ? mpa::Rng::from_u64(*seed) : mpa::Rng::from_entropy();
}

void write_output(const std::string& path, ByteView bytes) {
  if (path == "-") {
    std::cout.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    std::cout.flush();
    return;
  }
  write_file_atomic(path, bytes);
}

fs::path registry_path(const std::string& ca_dir) { return fs::path(ca_dir) / "principals.tsv"; }

void load_registry(access::CertificateAuthority& ca, const std::string& ca_dir) {
  const fs::path p = registry_path(ca_dir);
  std::error_code ec;
  if (!fs::exists(p, ec)) throw NotFound("no principal registry at " + p.string());
  ca.load(p);
}

// Grants and the audit log live next to the chain they govern.
fs::path grants_path(const std::string& chain_dir) { return fs::path(chain_dir) / "grants.tsv"; }
fs::path audit_path(const std::string& chain_dir) { return fs::path(chain_dir) / "audit.log"; }

access::RecordRef record_ref(const ledger::Chain& chain, const std::string& record_id) {
  auto loc = chain.locate(record_id);
  if (!loc) throw NotFound("no record '" + record_id + "'");
  return {record_id.substr(0, record_id.find('#')), chain.block(loc->block_index).owner_id};
}

access::Principal principal_or_throw(const access::CertificateAuthority& ca, const std::string& id) {
  auto p = ca.lookup(id);
  if (!p) throw NotFound("no principal '" + id + "'");
  return *p;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v == 0) {
      throw InvalidArgument("bad size '" + item + "' (positive KB values, comma separated)");
    }
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("no sizes given");
  return out;
}

void emit_report(const BenchReport& report, const std::string& path, std::ostream& out) {
  const std::string csv = write_csv(report);
  if (path.empty() || path == "-") {
    out << csv;
  } else {
    write_file_atomic(path, as_bytes(csv));
    out << "wrote " << report.rows.size() << " rows to " << path << '\n';
  }
}

}  // namespace

std::vector<std::size_t> parse_counts(std::string_view text, std::size_t step) {
  auto number = [](std::string_view s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw InvalidArgument("bad count '" + std::string(s) + "'");
    }
    if (v == 0) throw InvalidArgument("user count must be positive");
    return v;
  };
  std::vector<std::size_t> out;
  if (auto dots = text.find(".."); dots != std::string_view::npos) {
    const std::size_t lo = number(text.substr(0, dots));
    const std::size_t hi = number(text.substr(dots + 2));
    if (step == 0) throw InvalidArgument("step must be positive");
    if (lo > hi) throw InvalidArgument("empty range '" + std::string(text) + "'");
    for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    auto comma = text.find(',', start);
    out.push_back(number(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Medical record ledger: hybrid Twofish/RSA envelopes on a hash-chained store"};
  app.name("medledger");
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  bool verbose = false;
  app.add_option("--seed", seed, "Deterministic RNG seed (default: OS entropy; benches default to 1)");
  app.add_flag("-v,--verbose", verbose, "Progress output on stderr");

  // keygen
  std::string kg_id, kg_role = "patient", kg_out = ".";
  std::size_t kg_bits = 2048;
  bool kg_force = false;
  auto* keygen = app.add_subcommand("keygen", "Issue a key pair and register the principal");
  keygen->add_option("--id", kg_id, "Principal id")->required();
  keygen->add_option("--role", kg_role, "patient | institution | third-party | ca")->capture_default_str();
  keygen->add_option("--bits", kg_bits, "Modulus size: 512, 1024, 2048 or 4096")->capture_default_str();
  keygen->add_option("--out", kg_out, "Directory for <id>.pub, <id>.key and principals.tsv")->capture_default_str();
  keygen->add_flag("--force", kg_force, "Replace an existing principal and its key files");

  // encrypt / decrypt
  std::string enc_in, enc_to, enc_out;
  auto* encrypt = app.add_subcommand("encrypt", "Seal a file into an envelope for one receiver");
  encrypt->add_option("--in", enc_in, "Plaintext file")->required();
  encrypt->add_option("--to", enc_to, "Receiver public key file")->required();
  encrypt->add_option("--out", enc_out, "Envelope output file")->required();

  std::string dec_in, dec_key, dec_pub, dec_out;
  auto* decrypt = app.add_subcommand("decrypt", "Open an envelope with a private key");
  decrypt->add_option("--in", dec_in, "Envelope file")->required();
  decrypt->add_option("--key", dec_key, "Private key file")->required();
  decrypt->add_option("--pub", dec_pub, "Matching public key; enables the receiver fingerprint check");
  decrypt->add_option("--out", dec_out, "Plaintext output file ('-' for stdout)")->required();

  // store / fetch / verify
  std::string st_chain, st_id, st_owner, st_in, st_ca;
  auto* store = app.add_subcommand("store", "Append an envelope to the chain");
  store->add_option("--chain", st_chain, "Chain directory")->required();
  store->add_option("--record-id", st_id, "Record id")->required();
  store->add_option("--owner", st_owner, "Owner principal id")->required();
  store->add_option("--in", st_in, "Envelope file")->required();
  store->add_option("--ca", st_ca, "Registry directory; when given the owner must be registered");

  std::string fe_chain, fe_id, fe_as, fe_ca, fe_out, fe_key;
  bool fe_emergency = false;
  auto* fetch = app.add_subcommand("fetch", "Retrieve a record subject to the access policy");
  fetch->add_option("--chain", fe_chain, "Chain directory")->required();
  fetch->add_option("--record-id", fe_id, "Record id")->required();
  fetch->add_option("--as", fe_as, "Requesting principal id")->required();
  fetch->add_option("--ca", fe_ca, "Registry directory")->required();
  fetch->add_flag("--emergency", fe_emergency, "Emergency read (medical institutions only)");
  fetch->add_option("--key", fe_key, "Private key file; decrypt instead of returning the envelope");
  fetch->add_option("--out", fe_out, "Output file ('-' for stdout); omitted prints a summary");

  std::string vf_chain;
  auto* verify = app.add_subcommand("verify", "Check chain links, block hashes and stored envelopes");
  verify->add_option("--chain", vf_chain, "Chain directory")->required();

  // grant / revoke
  std::string gr_chain, gr_ca, gr_id, gr_to, gr_action = "read", gr_as;
  double gr_ttl = 86400;
  auto add_grant_options = [&](CLI::App* cmd) {
    cmd->add_option("--chain", gr_chain, "Chain directory")->required();
    cmd->add_option("--ca", gr_ca, "Registry directory")->required();
    cmd->add_option("--record-id", gr_id, "Record id")->required();
    cmd->add_option("--to", gr_to, "Grantee principal id")->required();
    cmd->add_option("--action", gr_action, "read | write")->capture_default_str();
    cmd->add_option("--as", gr_as, "Granting principal (default: the record owner)");
  };
  auto* grant = app.add_subcommand("grant", "Grant access to a record");
  add_grant_options(grant);
  grant->add_option("--ttl", gr_ttl, "Lifetime in seconds")->capture_default_str();
  auto* revoke = app.add_subcommand("revoke", "Withdraw every matching grant");
  add_grant_options(revoke);

  // bench
  auto* bench = app.add_subcommand("bench", "Performance measurements, written as CSV");
  bench->require_subcommand(1);
  std::string bs_sizes = "100,200,300,400,500", bs_schemes = "twofish,rsa,rsa-keywrap,hybrid", bs_out;
  std::size_t bs_reps = 5, bs_bits = 2048;
  auto* bench_size = bench->add_subcommand("size", "Encrypt/decrypt time against file size");
  bench_size->add_option("--sizes", bs_sizes, "File sizes in KB, comma separated")->capture_default_str();
  bench_size->add_option("--reps", bs_reps, "Timed repetitions per cell (median reported)")->capture_default_str();
  bench_size->add_option("--bits", bs_bits, "RSA modulus size")->capture_default_str();
  bench_size->add_option("--schemes", bs_schemes, "Schemes to run")->capture_default_str();
  bench_size->add_option("--out", bs_out, "CSV output file (default stdout)");

  std::string bl_users = "10..100", bl_out;
  std::size_t bl_step = 10, bl_bits = 1024, bl_record_kb = 100;
  double bl_duration = 3.0;
  auto* bench_load = bench->add_subcommand("load", "Mean fetch+decrypt latency against concurrent users");
  bench_load->add_option("--users", bl_users, "Range lo..hi or comma list")->capture_default_str();
  bench_load->add_option("--step", bl_step, "Step for a lo..hi range")->capture_default_str();
  bench_load->add_option("--duration", bl_duration, "Seconds per user count")->capture_default_str();
  bench_load->add_option("--record-kb", bl_record_kb, "Record size in KB")->capture_default_str();
  bench_load->add_option("--bits", bl_bits, "RSA modulus size")->capture_default_str();
  bench_load->add_option("--out", bl_out, "CSV output file (default stdout)");

  std::vector<const char*> argv{"medledger"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (keygen->parsed()) {
      if (!access::is_valid_id(kg_id)) throw InvalidArgument("invalid principal id '" + kg_id + "'");
      const access::Role role = access::parse_role(kg_role);
      if (!rsa::is_supported_key_size(kg_bits)) throw InvalidArgument("unsupported key size " + std::to_string(kg_bits));
      const fs::path dir(kg_out);
      fs::create_directories(dir);
      const fs::path pub_path = dir / (kg_id + ".pub"), key_path = dir / (kg_id + ".key");
      access::CertificateAuthority ca;
      ca.load(registry_path(kg_out));
      if (!kg_force) {
        if (ca.lookup(kg_id)) throw DuplicateId("principal '" + kg_id + "' already registered (use --force)");
        if (fs::exists(pub_path) || fs::exists(key_path)) {
          throw Error("key files for '" + kg_id + "' already exist (use --force)");
        }
      } else if (ca.lookup(kg_id)) {
        ca.revoke(kg_id);
      }
      mpa::Rng rng = make_rng(seed);
      const access::IssuedKeys issued = ca.issue_keypair(kg_id, role, kg_bits, rng);
      write_file_atomic(pub_path.string(), rsa::encode_public_key(issued.keys.pub));
      write_file_atomic(key_path.string(), rsa::encode_private_key(issued.keys.pri));
      fs::permissions(key_path, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
      ca.save(registry_path(kg_out));
      out << kg_id << ' ' << access::to_string(role) << ' ' << kg_bits << " fingerprint "
          << to_hex(issued.principal.fingerprint) << '\n';
      return kExitOk;
    }

    if (encrypt->parsed()) {
      const Bytes data = read_file(enc_in);
      const rsa::RsaPublicKey pub = rsa::decode_public_key(read_file(enc_to));
      mpa::Rng rng = make_rng(seed);
      const rsa::Envelope env = rsa::hybrid_encrypt(data, pub, rng);
      const Bytes encoded = rsa::encode_envelope(env);
      write_file_atomic(enc_out, encoded);
      out << "sealed " << data.size() << " bytes for " << to_hex(env.fingerprint) << " (" << encoded.size()
          << " byte envelope)\n";
      return kExitOk;
    }

    if (decrypt->parsed()) {
      const rsa::Envelope env = rsa::decode_envelope(read_file(dec_in));
      const rsa::RsaPrivateKey pri = rsa::decode_private_key(read_file(dec_key));
      Bytes plain;
      if (!dec_pub.empty()) {
        rsa::RsaKeyPair pair{rsa::decode_public_key(read_file(dec_pub)), pri, {}};
        if (pair.pub.n != pri.n) throw InvalidArgument("--pub does not match --key");
        plain = rsa::hybrid_decrypt(env, pair);
      } else {
        plain = rsa::hybrid_decrypt(env, pri);
      }
      write_output(dec_out, plain);
      if (dec_out != "-") out << "opened " << plain.size() << " bytes\n";
      return kExitOk;
    }

    if (store->parsed()) {
      const Bytes bytes = read_file(st_in);
      rsa::decode_envelope(bytes);
      if (!st_ca.empty()) {
        access::CertificateAuthority ca;
        load_registry(ca, st_ca);
        principal_or_throw(ca, st_owner);
      }
      ledger::Chain chain(st_chain);
      const ledger::Block b = chain.append_record(bytes, st_id, st_owner, static_cast<std::uint64_t>(now_ms()));
      out << "stored " << b.record_id << " at block " << b.index << " hash " << to_hex(b.block_hash) << '\n';
      return kExitOk;
    }

    if (fetch->parsed()) {
      access::CertificateAuthority ca;
      load_registry(ca, fe_ca);
      // Unknown ids still go through the policy so the denial is audited.
      const access::Principal requester =
          ca.lookup(fe_as).value_or(access::Principal{fe_as, access::Role::ThirdParty, {}});
      ledger::Chain chain(fe_chain);
      access::PermissionPolicy policy(ca, access::PermissionMatrix::standard());
      policy.load_grants(grants_path(fe_chain));
      policy.attach_audit_file(audit_path(fe_chain));
      const rsa::Envelope env = ledger::fetch_record(chain, fe_id, requester, policy, fe_emergency, now_ms());
      if (!fe_key.empty()) {
        const Bytes plain = rsa::hybrid_decrypt(env, rsa::decode_private_key(read_file(fe_key)));
        if (fe_out.empty()) {
          out << "record " << fe_id << ": " << plain.size() << " plaintext bytes verified\n";
        } else {
          write_output(fe_out, plain);
        }
      } else if (!fe_out.empty()) {
        write_output(fe_out, rsa::encode_envelope(env));
      } else {
        out << "record " << fe_id << " receiver " << to_hex(env.fingerprint) << " payload " << env.payload.size()
            << " bytes\n";
      }
      return kExitOk;
    }

    if (verify->parsed()) {
      if (!fs::is_directory(vf_chain)) throw NotFound("no chain directory " + vf_chain);
      const ledger::Chain chain(vf_chain);
      const ledger::ValidationResult r = ledger::verify_storage(chain);
      if (r.valid) {
        out << "Valid, " << r.blocks << " blocks\n";
        return kExitOk;
      }
      out << "Invalid at block " << r.first_bad_index << '\n';
      return kExitIntegrity;
    }

    if (grant->parsed() || revoke->parsed()) {
      access::CertificateAuthority ca;
      load_registry(ca, gr_ca);
      const ledger::Chain chain(gr_chain);
      const access::RecordRef ref = record_ref(chain, gr_id);
      const access::Principal granter = principal_or_throw(ca, gr_as.empty() ? ref.owner_id : gr_as);
      const access::Action action = access::parse_action(gr_action);
      access::PermissionPolicy policy(ca, access::PermissionMatrix::standard());
      policy.load_grants(grants_path(gr_chain));
      if (grant->parsed()) {
        if (!(gr_ttl > 0)) throw InvalidArgument("--ttl must be positive");
        const auto g = policy.grant(granter, gr_to, ref, action,
                                    std::chrono::milliseconds(static_cast<std::int64_t>(gr_ttl * 1000)), now_ms());
        policy.save_grants(grants_path(gr_chain));
        out << "granted " << access::to_string(action) << " on " << g.record_id << " to " << g.grantee_id
            << " until " << g.expiry_ms << " ms\n";
      } else {
        std::size_t removed = 0;
        for (const auto& g : policy.grants()) {
          if (g.grantee_id == gr_to && g.record_id == ref.record_id && g.action == action) {
            policy.revoke(granter, g, ref);
            ++removed;
          }
        }
        if (removed == 0) throw NotFound("no grant of " + gr_action + " on '" + ref.record_id + "' to '" + gr_to + "'");
        policy.save_grants(grants_path(gr_chain));
        out << "revoked " << removed << " grant(s)\n";
      }
      return kExitOk;
    }

    if (bench_size->parsed()) {
      SizeBenchConfig config;
      config.sizes_kb = parse_sizes(bs_sizes);
      config.reps = bs_reps;
      config.key_bits = bs_bits;
      config.seed = seed.value_or(1);
      config.schemes.clear();
      std::stringstream in(bs_schemes);
      for (std::string item; std::getline(in, item, ',');) config.schemes.push_back(parse_scheme(item));
      if (!rsa::is_supported_key_size(bs_bits)) throw InvalidArgument("unsupported key size " + std::to_string(bs_bits));
      if (bs_reps == 0) throw InvalidArgument("--reps must be at least 1");
      if (bs_reps == 1) err << "warning: --reps 1 reports single samples, not medians\n";
      emit_report(run_size_bench(config, verbose ? &err : nullptr), bs_out, out);
      return kExitOk;
    }

    if (bench_load->parsed()) {
      LoadBenchConfig config;
      config.users = parse_counts(bl_users, bl_step);
      config.duration_s = bl_duration;
      config.record_kb = bl_record_kb;
      config.key_bits = bl_bits;
      config.seed = seed.value_or(1);
      if (!rsa::is_supported_key_size(bl_bits)) throw InvalidArgument("unsupported key size " + std::to_string(bl_bits));
      if (!(bl_duration > 0)) throw InvalidArgument("--duration must be positive");
      emit_report(run_load_bench(config, verbose ? &err : nullptr), bl_out, out);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << error_kind(e) << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
  err << app.help();
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace medledger::cli
