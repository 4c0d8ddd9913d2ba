// SPDX-License-Identifier: Apache-2.0
#include "odn/checkpoint.hpp"

#include <sstream>

#include "odn/binary_io.hpp"
#include "odn/error.hpp"

namespace odn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Guards allocation sizes read from untrusted headers.
constexpr std::uint32_t kMaxCount = 1u << 28;

std::uint32_t checked_count(ByteReader& r, const char* what) {
  const auto n = r.get_u32();
  if (n > kMaxCount) throw FormatError(std::string("checkpoint: implausible ") + what);
  return n;
}

void put_mlp_config(ByteWriter& w, const MLPConfig& c) {
  w.put_u32(static_cast<std::uint32_t>(c.input_dim));
  w.put_u32(static_cast<std::uint32_t>(c.hidden_widths.size()));
  for (auto h : c.hidden_widths) w.put_u32(static_cast<std::uint32_t>(h));
  w.put_u32(static_cast<std::uint32_t>(c.output_dim));
  w.put_u8(static_cast<std::uint8_t>(c.activation));
  w.put_u8(c.activate_last_layer ? 1 : 0);
}

MLPConfig get_mlp_config(ByteReader& r) {
  MLPConfig c;
  c.input_dim = r.get_u32();
  const auto n_hidden = checked_count(r, "layer count");
  for (std::uint32_t i = 0; i < n_hidden; ++i) c.hidden_widths.push_back(r.get_u32());
  c.output_dim = r.get_u32();
  const auto act = r.get_u8();
  if (act > static_cast<std::uint8_t>(Activation::tanh)) {
    throw FormatError("checkpoint: unknown activation code " + std::to_string(act));
  }
  c.activation = static_cast<Activation>(act);
  c.activate_last_layer = r.get_u8() != 0;
  try {
    c.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint: bad network config: ") + e.what());
  }
  return c;
}

void put_basis(ByteWriter& w, const PODBasis& b) {
  w.put_u64(b.y_hash);
  w.put_u32(static_cast<std::uint32_t>(b.Y.rows));
  w.put_u32(static_cast<std::uint32_t>(b.Y.cols));
  w.put_u32(static_cast<std::uint32_t>(b.modes.cols));
  w.put_u32(static_cast<std::uint32_t>(b.p));
  w.put_f64_array(b.Y.data);
  w.put_f64_array(b.mean);
  w.put_f64_array(b.modes.data);
  w.put_u32(static_cast<std::uint32_t>(b.eigenvalues.size()));
  w.put_f64_array(b.eigenvalues);
}

PODBasis get_basis(ByteReader& r, bool modified) {
  PODBasis b;
  b.modified = modified;
  b.y_hash = r.get_u64();
  const std::size_t n_y = checked_count(r, "N_y");
  const std::size_t d_v = checked_count(r, "d_v");
  const std::size_t n_modes = checked_count(r, "mode count");
  b.p = r.get_u32();
  b.Y = Matrix(n_y, d_v, r.get_f64_array(n_y * d_v));
  b.mean = r.get_f64_array(n_y);
  b.modes = Matrix(n_y, n_modes, r.get_f64_array(n_y * n_modes));
  b.eigenvalues = r.get_f64_array(checked_count(r, "eigenvalue count"));
  if (hash_points(b.Y) != b.y_hash) {
    throw FormatError("checkpoint: POD basis location hash mismatch");
  }
  const std::size_t needed = modified ? b.p - 1 : b.p;
  if (b.p == 0 || n_modes < needed) throw FormatError("checkpoint: POD basis has too few modes");
  return b;
}

void put_patches(ByteWriter& w, const PatchSet& ps) {
  w.put_u32(static_cast<std::uint32_t>(ps.dim()));
  w.put_u32(static_cast<std::uint32_t>(ps.size()));
  w.put_f64(ps.delta());
  for (const auto& p : ps.patches()) {
    w.put_f64_array(p.center);
    w.put_f64(p.radius);
  }
}

PatchSet get_patches(ByteReader& r) {
  const std::size_t d = checked_count(r, "patch dimension");
  const std::size_t n = checked_count(r, "patch count");
  const double delta = r.get_f64();
  std::vector<Patch> patches;
  for (std::size_t k = 0; k < n; ++k) {
    Patch p;
    p.center = r.get_f64_array(d);
    p.radius = r.get_f64();
    patches.push_back(std::move(p));
  }
  try {
    return PatchSet(std::move(patches), delta);
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint: bad patch set: ") + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const EnsembleModel& m = ckpt.model;
  ByteWriter w;
  w.put_bytes(std::string_view(kModelMagic, 8));
  w.put_u32(kModelVersion);
  w.put_string(ckpt.config_text);
  w.put_u64(ckpt.seed);
  put_mlp_config(w, m.branch().config());
  w.put_u8(m.has_bias() ? 1 : 0);
  w.put_u32(static_cast<std::uint32_t>(m.members().size()));
  for (const auto& member : m.members()) {
    w.put_u8(static_cast<std::uint8_t>(member_kind(member)));
    std::visit(overloaded{
                   [&](const VanillaTrunk& t) { put_mlp_config(w, t.net.config()); },
                   [&](const PodTrunk& t) { put_basis(w, *t.basis); },
                   [&](const PouTrunk& t) {
                     put_patches(w, t.patches);
                     put_mlp_config(w, t.experts.front().config());
                   },
               },
               member);
  }
  const auto params = m.parameters();
  w.put_u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.put_string(p.name);
    w.put_u32(static_cast<std::uint32_t>(p.tensor.rank()));
    for (auto e : p.tensor.shape()) w.put_u64(e);
    w.put_f64_array(p.tensor.data());
  }
  w.seal();
  return w.bytes();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader header(bytes);
  if (header.get_bytes(8) != std::string_view(kModelMagic, 8)) {
    throw FormatError("not an ODM1 checkpoint (bad magic)");
  }
  const auto version = header.get_u32();
  if (version != kModelVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  ByteReader r(verify_crc(bytes, "checkpoint"));
  r.get_bytes(12);
  Checkpoint ckpt;
  ckpt.config_text = r.get_string();
  ckpt.seed = r.get_u64();
  const MLPConfig branch_cfg = get_mlp_config(r);
  const bool has_bias = r.get_u8() != 0;
  const auto n_members = checked_count(r, "member count");
  std::vector<TrunkMember> members;
  for (std::uint32_t j = 0; j < n_members; ++j) {
    const auto kind = r.get_u8();
    switch (static_cast<TrunkKind>(kind)) {
      case TrunkKind::vanilla:
        members.emplace_back(VanillaTrunk{MLP(get_mlp_config(r))});
        break;
      case TrunkKind::pod:
      case TrunkKind::modified_pod:
        members.emplace_back(PodTrunk{std::make_shared<PODBasis>(
            get_basis(r, static_cast<TrunkKind>(kind) == TrunkKind::modified_pod))});
        break;
      case TrunkKind::pou: {
        PouTrunk t{get_patches(r), {}};
        const MLPConfig cfg = get_mlp_config(r);
        for (std::size_t k = 0; k < t.patches.size(); ++k) t.experts.emplace_back(cfg);
        members.emplace_back(std::move(t));
        break;
      }
      default:
        throw FormatError("checkpoint: unknown trunk kind " + std::to_string(kind));
    }
  }
  try {
    ckpt.model = EnsembleModel(std::move(members), MLP(branch_cfg), has_bias);
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint: inconsistent model: ") + e.what());
  }

  auto params = ckpt.model.parameters();
  const auto n_tensors = checked_count(r, "tensor count");
  if (n_tensors != params.size()) {
    throw FormatError("checkpoint stores " + std::to_string(n_tensors) + " tensors, model has " +
                      std::to_string(params.size()));
  }
  for (auto& p : params) {
    const std::string name = r.get_string();
    if (name != p.name) {
      throw FormatError("checkpoint: expected tensor '" + p.name + "', found '" + name + "'");
    }
    const auto rank = checked_count(r, "tensor rank");
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(r.get_u64());
    if (shape != p.tensor.shape()) {
      throw FormatError("checkpoint: tensor '" + name + "' has shape " + shape_string(shape) +
                        ", expected " + shape_string(p.tensor.shape()));
    }
    const auto values = r.get_f64_array(p.tensor.size());
    std::copy(values.begin(), values.end(), p.tensor.mutable_data().begin());
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes before checksum");
  return ckpt;
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

std::string describe_checkpoint(const Checkpoint& ckpt) {
  const EnsembleModel& m = ckpt.model;
  std::ostringstream os;
  os << "format: ODM1 v" << kModelVersion << "\n";
  os << "seed: " << ckpt.seed << "\n";
  os << "branch: " << m.branch().config().input_dim << " -> ";
  for (auto h : m.branch().config().hidden_widths) os << h << " -> ";
  os << m.branch().config().output_dim << " (" << to_string(m.branch().config().activation)
     << ")\n";
  os << "bias: " << (m.has_bias() ? "yes" : "no") << "\n";
  os << "members: " << m.members().size() << "\n";
  for (std::size_t j = 0; j < m.members().size(); ++j) {
    const auto& member = m.members()[j];
    os << "  trunk" << j << ": " << to_string(member_kind(member))
       << " p=" << member_width(member);
    if (const auto* pou = std::get_if<PouTrunk>(&member)) {
      os << " patches=" << pou->patches.size() << " delta=" << pou->patches.delta();
    }
    if (const auto* pod = std::get_if<PodTrunk>(&member)) {
      os << " N_y=" << pod->basis->n_points() << " modes=" << pod->basis->n_modes();
    }
    os << "\n";
  }
  os << "total width: " << m.total_width() << "\n";
  os << "parameters: " << m.parameter_count() << "\n";
  os << "config:\n" << ckpt.config_text;
  if (!ckpt.config_text.empty() && ckpt.config_text.back() != '\n') os << "\n";
  return os.str();
}

}  // namespace odn
