// SPDX-License-Identifier: Apache-2.0
#include "odn/dataset.hpp"

#include <cmath>
#include <sstream>

#include "odn/binary_io.hpp"

namespace odn {

namespace {

void require_finite(const Matrix& m, const char* name) {
  for (double v : m.data) {
    if (!std::isfinite(v)) throw NumericError(std::string("dataset: non-finite value in ") + name);
  }
}

std::string encode_metadata(const std::map<std::string, std::string>& md) {
  std::string out;
  for (const auto& [k, v] : md) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw FormatError("dataset metadata keys/values may not contain '=' or newlines");
    }
    out += k + "=" + v + "\n";
  }
  return out;
}

std::map<std::string, std::string> decode_metadata(const std::string& text) {
  std::map<std::string, std::string> md;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("dataset metadata line without '='");
    md[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return md;
}

}  // namespace

void OperatorDataset::validate() const {
  if (X.rows == 0 || Y.rows == 0) throw DimensionError("dataset: empty sample grids");
  if (components == 0) throw DimensionError("dataset: zero output components");
  if (U.rows != V.rows) {
    throw DimensionError("dataset: U has " + std::to_string(U.rows) + " rows but V has " +
                         std::to_string(V.rows));
  }
  if (U.cols != X.rows) {
    throw DimensionError("dataset: U has " + std::to_string(U.cols) + " columns but N_x=" +
                         std::to_string(X.rows));
  }
  if (V.cols != Y.rows * components) {
    throw DimensionError("dataset: V has " + std::to_string(V.cols) + " columns but N_y*c=" +
                         std::to_string(Y.rows * components));
  }
  require_finite(X, "X");
  require_finite(Y, "Y");
  require_finite(U, "U");
  require_finite(V, "V");
}

std::size_t OperatorDataset::n_train(std::size_t fallback) const {
  auto it = metadata.find("n_train");
  if (it == metadata.end()) return std::min(fallback, size());
  std::size_t n = 0;
  try {
    n = std::stoul(it->second);
  } catch (const std::exception&) {
    throw FormatError("dataset metadata n_train is not an integer");
  }
  if (n > size()) throw FormatError("dataset metadata n_train exceeds sample count");
  return n;
}

OperatorDataset OperatorDataset::slice(std::size_t first, std::size_t count) const {
  OperatorDataset out;
  out.X = X;
  out.Y = Y;
  out.U = U.slice_rows(first, count);
  out.V = V.slice_rows(first, count);
  out.components = components;
  out.metadata = metadata;
  return out;
}

std::vector<std::uint8_t> encode_dataset(const OperatorDataset& ds) {
  ds.validate();
  ByteWriter w;
  w.put_bytes(std::string_view(kDatasetMagic, 8));
  w.put_u32(kDatasetVersion);
  w.put_u32(static_cast<std::uint32_t>(ds.X.cols));
  w.put_u32(static_cast<std::uint32_t>(ds.Y.cols));
  w.put_u32(static_cast<std::uint32_t>(ds.X.rows));
  w.put_u32(static_cast<std::uint32_t>(ds.Y.rows));
  w.put_u32(static_cast<std::uint32_t>(ds.size()));
  w.put_u32(static_cast<std::uint32_t>(ds.components));
  w.put_f64_array(ds.X.data);
  w.put_f64_array(ds.Y.data);
  w.put_f64_array(ds.U.data);
  w.put_f64_array(ds.V.data);
  w.put_string(encode_metadata(ds.metadata));
  w.seal();
  return w.bytes();
}

OperatorDataset decode_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader header(bytes);
  if (header.get_bytes(8) != std::string_view(kDatasetMagic, 8)) {
    throw FormatError("not an ODN1 dataset (bad magic)");
  }
  const auto version = header.get_u32();
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version));
  }
  ByteReader r(verify_crc(bytes, "dataset"));
  r.get_bytes(12);
  const std::size_t d_u = r.get_u32(), d_v = r.get_u32();
  const std::size_t n_x = r.get_u32(), n_y = r.get_u32();
  const std::size_t n = r.get_u32(), c = r.get_u32();
  OperatorDataset ds;
  ds.components = c;
  ds.X = Matrix(n_x, d_u, r.get_f64_array(n_x * d_u));
  ds.Y = Matrix(n_y, d_v, r.get_f64_array(n_y * d_v));
  ds.U = Matrix(n, n_x, r.get_f64_array(n * n_x));
  ds.V = Matrix(n, n_y * c, r.get_f64_array(n * n_y * c));
  ds.metadata = decode_metadata(r.get_string());
  if (r.remaining() != 0) throw FormatError("dataset: trailing bytes before checksum");
  ds.validate();
  return ds;
}

void write_dataset(const OperatorDataset& ds, const std::filesystem::path& path) {
  write_file(path, encode_dataset(ds));
}

OperatorDataset read_dataset(const std::filesystem::path& path) {
  return decode_dataset(read_file(path));
}

}  // namespace odn
