#include "medledger/cli/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "medledger/access/ca.hpp"
#include "medledger/access/policy.hpp"
#include "medledger/errors.hpp"
#include "medledger/ledger/chain.hpp"
#include "medledger/rsa/envelope.hpp"
#include "medledger/twofish/cbc.hpp"

namespace medledger::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::int64_t wall_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Bytes random_bytes(mpa::Rng& rng, std::size_t n) {
  Bytes out(n);
  rng.fill(out);
  return out;
}

struct Timing {
  double encrypt_s;
  double decrypt_s;
};

// One timed encrypt + decrypt of `data` under `scheme`; throws if the round
// trip does not reproduce the input.
Timing run_once(Scheme scheme, ByteView data, const rsa::RsaKeyPair& keys, mpa::Rng& rng) {
  Timing t{};
  bool ok = false;
  switch (scheme) {
    case Scheme::Twofish: {
      Bytes key_bytes = random_bytes(rng, 32);
      twofish::Block iv{};
      rng.fill(iv);
      auto start = Clock::now();
      const auto key = twofish::TwofishKey::from_bytes(key_bytes);
      Bytes ct = twofish::cbc_encrypt(key, iv, data);
      t.encrypt_s = seconds_since(start);
      start = Clock::now();
      Bytes pt = twofish::cbc_decrypt(key, iv, ct);
      t.decrypt_s = seconds_since(start);
      ok = std::equal(pt.begin(), pt.end(), data.begin(), data.end());
      break;
    }
    case Scheme::Rsa: {
      auto start = Clock::now();
      Bytes ct = rsa_blockwise_encrypt(data, keys.pub);
      t.encrypt_s = seconds_since(start);
      start = Clock::now();
      Bytes pt = rsa_blockwise_decrypt(ct, keys.pri);
      t.decrypt_s = seconds_since(start);
      ok = std::equal(pt.begin(), pt.end(), data.begin(), data.end());
      break;
    }
    case Scheme::RsaKeyWrap: {
      rsa::SessionKey sk{};
      rng.fill(sk);
      auto start = Clock::now();
      Bytes wrapped = rsa::wrap_session_key(sk, keys.pub, rng);
      t.encrypt_s = seconds_since(start);
      start = Clock::now();
      rsa::SessionKey back = rsa::unwrap_session_key(wrapped, keys.pri);
      t.decrypt_s = seconds_since(start);
      ok = back == sk;
      break;
    }
    case Scheme::Hybrid: {
      auto start = Clock::now();
      rsa::Envelope env = rsa::hybrid_encrypt(data, keys.pub, rng);
      t.encrypt_s = seconds_since(start);
      start = Clock::now();
      Bytes pt = rsa::hybrid_decrypt(env, keys);
      t.decrypt_s = seconds_since(start);
      ok = std::equal(pt.begin(), pt.end(), data.begin(), data.end());
      break;
    }
  }
  if (!ok) throw Error(std::string(to_string(scheme)) + " round trip failed during benchmark");
  return t;
}

class TempDir {
 public:
  explicit TempDir(mpa::Rng& rng) {
    path_ = std::filesystem::temp_directory_path() / ("medledger-load-" + to_hex(random_bytes(rng, 8)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Twofish: return "twofish";
    case Scheme::Rsa: return "rsa";
    case Scheme::RsaKeyWrap: return "rsa-keywrap";
    case Scheme::Hybrid: return "hybrid";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view text) {
  for (Scheme s : kAllSchemes) {
    if (to_string(s) == text) return s;
  }
  throw InvalidArgument("unknown scheme '" + std::string(text) + "' (twofish, rsa, rsa-keywrap, hybrid)");
}

bool scales_with_size(Scheme s) { return s != Scheme::RsaKeyWrap; }

Bytes rsa_blockwise_encrypt(ByteView data, const rsa::RsaPublicKey& pub) {
  const std::size_t k = pub.modulus_bytes();
  if (k < 2) throw InvalidArgument("modulus too small for block-wise RSA");
  const std::size_t chunk = k - 1;
  Bytes out;
  out.reserve(8 + (data.size() / chunk + 1) * k);
  put_u64(out, data.size());
  for (std::size_t off = 0; off < data.size(); off += chunk) {
    const auto piece = data.subspan(off, std::min(chunk, data.size() - off));
    const Bytes block = rsa::rsa_encrypt_raw(mpa::Natural::from_bytes_be(piece), pub).to_bytes_be(k);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

Bytes rsa_blockwise_decrypt(ByteView data, const rsa::RsaPrivateKey& pri) {
  const std::size_t k = pri.modulus_bytes();
  const std::size_t chunk = k - 1;
  ByteReader in(data);
  const std::uint64_t total = in.u64();
  const std::uint64_t blocks = (total + chunk - 1) / chunk;
  if (in.remaining() != blocks * k) throw FormatError("block-wise RSA ciphertext has the wrong length");
  Bytes out;
  out.reserve(total);
  for (std::uint64_t i = 0; i < blocks; ++i) {
    const std::size_t len = static_cast<std::size_t>(std::min<std::uint64_t>(chunk, total - i * chunk));
    const Bytes piece = rsa::rsa_decrypt_raw(mpa::Natural::from_bytes_be(in.take(k)), pri).to_bytes_be(len);
    out.insert(out.end(), piece.begin(), piece.end());
  }
  return out;
}

BenchReport run_size_bench(const SizeBenchConfig& config, std::ostream* progress) {
  if (config.reps == 0) throw InvalidArgument("reps must be at least 1");
  if (config.sizes_kb.empty() || config.schemes.empty()) throw InvalidArgument("nothing to benchmark");
  if (std::find(config.sizes_kb.begin(), config.sizes_kb.end(), 0u) != config.sizes_kb.end()) {
    throw InvalidArgument("sizes must be positive");
  }

  mpa::Rng rng = mpa::Rng::from_u64(config.seed);
  const rsa::RsaKeyPair keys = rsa::keygen(config.key_bits, rng);

  BenchReport report;
  report.notes.push_back(host_fingerprint());
  report.notes.push_back("bench=size key_bits=" + std::to_string(config.key_bits) +
                         " reps=" + std::to_string(config.reps) + " seed=" + std::to_string(config.seed) +
                         " cells=median seconds");
  report.notes.push_back("rsa = textbook RSA applied to every (k-1)-byte chunk of the file; a timing baseline, not a secure mode");
  report.notes.push_back("rsa-keywrap = one session-key wrap and unwrap per file; constant in file size");

  for (Scheme scheme : config.schemes) {
    const Bytes warm = random_bytes(rng, config.sizes_kb.front() * 1024);
    run_once(scheme, warm, keys, rng);
    for (std::size_t kb : config.sizes_kb) {
      const Bytes data = random_bytes(rng, kb * 1024);
      std::vector<double> enc, dec;
      for (std::size_t r = 0; r < config.reps; ++r) {
        const Timing t = run_once(scheme, data, keys, rng);
        enc.push_back(t.encrypt_s);
        dec.push_back(t.decrypt_s);
      }
      BenchRow row{std::string(to_string(scheme)), kb, median(enc), median(dec), std::nullopt, config.reps};
      if (progress) {
        *progress << row.label << ' ' << kb << "KB encrypt " << *row.encrypt_s << "s decrypt " << *row.decrypt_s
                  << "s\n";
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

BenchReport run_load_bench(const LoadBenchConfig& config, std::ostream* progress) {
  if (config.users.empty()) throw InvalidArgument("no user counts given");
  if (std::find(config.users.begin(), config.users.end(), 0u) != config.users.end()) {
    throw InvalidArgument("user counts must be positive");
  }
  if (!(config.duration_s > 0)) throw InvalidArgument("duration must be positive");
  if (config.records == 0 || config.record_kb == 0) throw InvalidArgument("need at least one nonempty record");

  mpa::Rng rng = mpa::Rng::from_u64(config.seed);
  std::optional<TempDir> temp;
  std::filesystem::path dir = config.work_dir;
  if (dir.empty()) {
    temp.emplace(rng);
    dir = temp->path();
  }

  access::CertificateAuthority ca;
  const access::IssuedKeys owner = ca.issue_keypair("patient-0", access::Role::Patient, config.key_bits, rng);
  const access::IssuedKeys reader = ca.issue_keypair("clinic-0", access::Role::MedicalInstitution, config.key_bits, rng);
  access::PermissionPolicy policy(ca, access::PermissionMatrix::standard());
  ledger::Chain chain(dir / "chain");

  std::vector<std::string> ids;
  for (std::size_t r = 0; r < config.records; ++r) {
    const std::string id = "load-" + std::to_string(r);
    const Bytes data = random_bytes(rng, config.record_kb * 1024);
    const auto block = chain.append_record(rsa::hybrid_encrypt(data, reader.keys.pub, rng), id,
                                           owner.principal.id, static_cast<std::uint64_t>(wall_ms()));
    policy.grant(owner.principal, reader.principal.id, {id, owner.principal.id}, access::Action::Read,
                 std::chrono::hours(24), wall_ms());
    ids.push_back(block.record_id);
  }

  BenchReport report;
  report.notes.push_back(host_fingerprint());
  report.notes.push_back("bench=load key_bits=" + std::to_string(config.key_bits) +
                         " record_kb=" + std::to_string(config.record_kb) +
                         " duration_s=" + std::to_string(config.duration_s) +
                         " request=fetch+decrypt latency=mean seconds reps=completed requests");

  for (std::size_t n : config.users) {
    std::mutex merge_mutex;
    std::vector<double> latencies;
    std::atomic<bool> failed{false};
    const auto deadline = Clock::now() + std::chrono::duration<double>(config.duration_s);
    std::vector<std::thread> workers;
    workers.reserve(n);
    for (std::size_t u = 0; u < n; ++u) {
      workers.emplace_back([&, u] {
        std::vector<double> local;
        std::size_t next = u;
        try {
          do {
            const std::string& id = ids[next++ % ids.size()];
            const auto start = Clock::now();
            const rsa::Envelope env = ledger::fetch_record(chain, id, reader.principal, policy, false, wall_ms());
            const Bytes plain = rsa::hybrid_decrypt(env, reader.keys);
            local.push_back(seconds_since(start));
            if (plain.empty()) failed = true;
          } while (Clock::now() < deadline);
        } catch (const std::exception&) {
          failed = true;
        }
        std::lock_guard lock(merge_mutex);
        latencies.insert(latencies.end(), local.begin(), local.end());
      });
    }
    for (auto& w : workers) w.join();
    if (failed) throw Error("load benchmark request failed at " + std::to_string(n) + " users");

    const double mean = std::accumulate(latencies.begin(), latencies.end(), 0.0) / static_cast<double>(latencies.size());
    BenchRow row{"fetch+decrypt", n, std::nullopt, std::nullopt, mean, latencies.size()};
    if (progress) *progress << n << " users: mean latency " << mean << "s over " << latencies.size() << " requests\n";
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace medledger::cli
