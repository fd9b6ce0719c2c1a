#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medledger::cli {

struct BenchRow {
  std::string label;
  std::uint64_t size_or_users = 0;
  std::optional<double> encrypt_s;
  std::optional<double> decrypt_s;
  std::optional<double> latency_s;
  std::size_t reps = 0;

  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

/// CSV benchmark report. `notes` become leading "# " comment lines (host
/// description, caveats); then the header
///   label,size_or_users,encrypt_s,decrypt_s,latency_s,reps
/// and one line per row, with empty cells for columns that do not apply.
struct BenchReport {
  std::vector<std::string> notes;
  std::vector<BenchRow> rows;

  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

inline constexpr std::string_view kCsvHeader = "label,size_or_users,encrypt_s,decrypt_s,latency_s,reps";

/// Doubles are written in shortest round-trip form, so read_csv(write_csv(r)) == r.
/// Throws InvalidArgument for labels or notes containing commas or newlines.
std::string write_csv(const BenchReport& report);
/// Throws FormatError on a missing header or malformed row.
BenchReport read_csv(std::string_view text);

/// One-line description of the machine the numbers came from.
std::string host_fingerprint();

double median(std::vector<double> samples);
/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace medledger::cli
