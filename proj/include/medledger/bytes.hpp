#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medledger {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(ByteView bytes);
// Accepts upper or lower case; throws FormatError on odd length or bad digit.
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Big-endian integer framing used by every on-disk format in the project.
void put_u16(Bytes& out, std::uint16_t v);
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);

// Bounds-checked sequential reader. Every read past the end throws
// FormatError; nothing is ever read out of range.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteView take(std::size_t n);
  template <std::size_t N>
  std::array<std::uint8_t, N> take_array() {
    auto v = take(N);
    std::array<std::uint8_t, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }
  // Throws FormatError if unread bytes remain.
  void expect_done(const char* what) const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

Bytes read_file(const std::string& path);
// Writes via a temporary sibling and rename so readers never see a torn file.
void write_file_atomic(const std::string& path, ByteView data);

}  // namespace medledger
