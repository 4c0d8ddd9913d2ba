// SPDX-License-Identifier: Apache-2.0
//
// Little-endian byte buffers and CRC32 shared by the dataset and checkpoint
// file formats.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace odn {

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { buf_.push_back(v); }
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f64(double v);
  void put_f64_array(std::span<const double> values);
  void put_bytes(std::string_view s);
  /// u32 length prefix followed by the bytes.
  void put_string(std::string_view s);

  const std::vector<std::uint8_t>& bytes() const { return buf_; }

  /// Appends CRC32 of everything written so far.
  void seal();

 private:
  std::vector<std::uint8_t> buf_;
};

/// Bounds-checked reader; every overrun throws FormatError.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t get_u8();
  std::uint32_t get_u32();
  std::uint64_t get_u64();
  double get_f64();
  std::vector<double> get_f64_array(std::size_t count);
  std::string get_bytes(std::size_t count);
  std::string get_string();

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Checks the trailing CRC32 and returns the payload preceding it.
std::span<const std::uint8_t> verify_crc(std::span<const std::uint8_t> bytes, const char* what);

}  // namespace odn
