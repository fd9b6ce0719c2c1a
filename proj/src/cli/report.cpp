#include "medledger/cli/report.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "medledger/errors.hpp"

namespace medledger::cli {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view cell, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError(std::string("bad ") + what + " cell '" + std::string(cell) + "'");
  }
  return value;
}

std::optional<double> parse_optional(std::string_view cell, const char* what) {
  if (cell.empty()) return std::nullopt;
  return parse_number<double>(cell, what);
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

std::string write_csv(const BenchReport& report) {
  std::ostringstream out;
  for (const auto& note : report.notes) {
    if (note.find('\n') != std::string::npos) throw InvalidArgument("report note contains a newline");
    out << "# " << note << '\n';
  }
  out << kCsvHeader << '\n';
  for (const auto& row : report.rows) {
    if (row.label.find_first_of(",\n#") != std::string::npos || row.label.empty()) {
      throw InvalidArgument("bad report label '" + row.label + "'");
    }
    out << row.label << ',' << row.size_or_users << ',';
    if (row.encrypt_s) out << format_double(*row.encrypt_s);
    out << ',';
    if (row.decrypt_s) out << format_double(*row.decrypt_s);
    out << ',';
    if (row.latency_s) out << format_double(*row.latency_s);
    out << ',' << row.reps << '\n';
  }
  return out.str();
}

BenchReport read_csv(std::string_view text) {
  BenchReport report;
  bool header_seen = false;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line.starts_with("# ")) {
        report.notes.emplace_back(line.substr(2));
        continue;
      }
      if (line != kCsvHeader) throw FormatError("missing or unexpected CSV header");
      header_seen = true;
      continue;
    }
    auto cells = split(line, ',');
    if (cells.size() != 6) throw FormatError("CSV row does not have 6 cells");
    BenchRow row;
    row.label = std::string(cells[0]);
    row.size_or_users = parse_number<std::uint64_t>(cells[1], "size_or_users");
    row.encrypt_s = parse_optional(cells[2], "encrypt_s");
    row.decrypt_s = parse_optional(cells[3], "decrypt_s");
    row.latency_s = parse_optional(cells[4], "latency_s");
    row.reps = parse_number<std::size_t>(cells[5], "reps");
    report.rows.push_back(std::move(row));
  }
  if (!header_seen) throw FormatError("missing CSV header");
  return report;
}

std::string host_fingerprint() {
  char host[256] = {};
  if (gethostname(host, sizeof host - 1) != 0) std::snprintf(host, sizeof host, "unknown");
  std::ostringstream out;
  out << "host=" << host << " hw_threads=" << std::thread::hardware_concurrency();
#if defined(__clang__)
  out << " compiler=clang-" << __clang_major__ << '.' << __clang_minor__;
#elif defined(__GNUC__)
  out << " compiler=gcc-" << __GNUC__ << '.' << __GNUC_MINOR__;
#endif
#ifdef NDEBUG
  out << " build=release";
#else
  out << " build=debug";
#endif
  return out.str();
}

double median(std::vector<double> samples) {
  if (samples.empty()) throw InvalidArgument("median of no samples");
  const std::size_t mid = samples.size() / 2;
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(mid), samples.end());
  double hi = samples[mid];
  if (samples.size() % 2 == 1) return hi;
  double lo = *std::max_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lo + hi) / 2.0;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("spearman needs two equal-length series");
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace medledger::cli
