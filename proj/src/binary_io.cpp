// SPDX-License-Identifier: Apache-2.0
#include "odn/binary_io.hpp"

#include <zlib.h>

#include <bit>
#include <fstream>
#include <limits>

#include "odn/error.hpp"

namespace odn {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto chunk = static_cast<uInt>(
        std::min<std::size_t>(bytes.size() - pos, std::numeric_limits<uInt>::max()));
    crc = ::crc32(crc, bytes.data() + pos, chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void ByteWriter::put_u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_f64_array(std::span<const double> values) {
  buf_.reserve(buf_.size() + 8 * values.size());
  for (double v : values) put_f64(v);
}

void ByteWriter::put_bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

void ByteWriter::put_string(std::string_view s) {
  put_u32(static_cast<std::uint32_t>(s.size()));
  put_bytes(s);
}

void ByteWriter::seal() { put_u32(crc32(buf_)); }

void ByteReader::need(std::size_t n) const {
  if (n > remaining()) {
    throw FormatError("unexpected end of data: need " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_) + ", have " + std::to_string(remaining()));
  }
}

std::uint8_t ByteReader::get_u8() {
  need(1);
  return bytes_[pos_++];
}

std::uint32_t ByteReader::get_u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

std::uint64_t ByteReader::get_u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

double ByteReader::get_f64() { return std::bit_cast<double>(get_u64()); }

std::vector<double> ByteReader::get_f64_array(std::size_t count) {
  if (count > remaining() / 8) {
    throw FormatError("unexpected end of data: array of " + std::to_string(count) +
                      " doubles at offset " + std::to_string(pos_));
  }
  std::vector<double> out(count);
  for (auto& v : out) v = get_f64();
  return out;
}

std::string ByteReader::get_bytes(std::size_t count) {
  need(count);
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), count);
  pos_ += count;
  return s;
}

std::string ByteReader::get_string() { return get_bytes(get_u32()); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  // Write to a sibling temp file first so a failed write never leaves a
  // truncated artifact under the final name.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure on '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

std::span<const std::uint8_t> verify_crc(std::span<const std::uint8_t> bytes, const char* what) {
  if (bytes.size() < 4) throw FormatError(std::string(what) + ": file too short");
  const auto payload = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4));
  const std::uint32_t stored = tail.get_u32();
  if (crc32(payload) != stored) throw FormatError(std::string(what) + ": CRC32 mismatch");
  return payload;
}

}  // namespace odn
