#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "medledger/bytes.hpp"
#include "medledger/cli/report.hpp"
#include "medledger/rsa/rsa.hpp"

namespace medledger::cli {

enum class Scheme {
  Twofish,     // Twofish-CBC under a fresh 256-bit key
  Rsa,         // raw RSA applied block by block to the whole file
  RsaKeyWrap,  // RSA on the session key only; does not depend on file size
  Hybrid,      // full envelope: Twofish payload plus wrapped key
};
inline constexpr Scheme kAllSchemes[] = {Scheme::Twofish, Scheme::Rsa, Scheme::RsaKeyWrap, Scheme::Hybrid};

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view text);
/// False for schemes whose cost is constant per file.
bool scales_with_size(Scheme s);

/// Textbook RSA over (k-1)-byte chunks, k the modulus size. Output is
/// u64 plaintext length followed by one k-byte block per chunk. There is no
/// padding; this exists so the benchmark has an RSA-only baseline.
Bytes rsa_blockwise_encrypt(ByteView data, const rsa::RsaPublicKey& pub);
Bytes rsa_blockwise_decrypt(ByteView data, const rsa::RsaPrivateKey& pri);

struct SizeBenchConfig {
  std::vector<std::size_t> sizes_kb{100, 200, 300, 400, 500};
  std::size_t reps = 5;
  std::size_t key_bits = 2048;
  std::vector<Scheme> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  std::uint64_t seed = 1;
};

/// One row per (scheme, size) with median encrypt and decrypt seconds over
/// `reps` timed runs. Each scheme gets one untimed warmup run first. Every
/// timed run is checked to round-trip. `progress` receives one line per row.
BenchReport run_size_bench(const SizeBenchConfig& config, std::ostream* progress = nullptr);

struct LoadBenchConfig {
  std::vector<std::size_t> users{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  double duration_s = 3.0;
  std::size_t record_kb = 100;
  std::size_t records = 8;
  std::size_t key_bits = 1024;
  std::uint64_t seed = 1;
  /// Scratch directory for the chain; a temporary one is used when empty.
  std::filesystem::path work_dir;
};

/// Closed-loop load: for each user count N, N threads repeatedly fetch a
/// granted record from a shared chain and decrypt it until the duration
/// elapses. One row per N with the mean request latency; reps holds the
/// number of completed requests.
BenchReport run_load_bench(const LoadBenchConfig& config, std::ostream* progress = nullptr);

}  // namespace medledger::cli
