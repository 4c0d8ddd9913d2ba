// SPDX-License-Identifier: Apache-2.0
#include "odn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace odn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

std::size_t to_size(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& item : split(v, ',')) out.push_back(to_size(key, item));
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v, char sep = ',') {
  std::vector<double> out;
  for (const auto& item : split(v, sep)) out.push_back(to_double(key, item));
  return out;
}

// Consumes recognised keys from one section; anything left over is an error.
class Section {
 public:
  Section(std::string name, std::map<std::string, std::string> kv)
      : name_(std::move(name)), kv_(std::move(kv)) {}

  template <typename F>
  void take(const std::string& key, F&& apply) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return;
    apply(name_ + "." + key, it->second);
    kv_.erase(it);
  }

  void finish() const {
    if (!kv_.empty()) {
      throw ConfigError("unknown key '" + kv_.begin()->first + "' in section [" + name_ + "]");
    }
  }

 private:
  std::string name_;
  std::map<std::string, std::string> kv_;
};

std::vector<TrunkKind> parse_members(const std::string& key, const std::string& v) {
  std::vector<TrunkKind> out;
  for (const auto& item : split(v, ',')) {
    const auto star = item.find('*');
    if (star == std::string::npos) {
      out.push_back(parse_trunk_kind(item));
      continue;
    }
    const auto kind = parse_trunk_kind(trim(item.substr(0, star)));
    const auto count = to_size(key, trim(item.substr(star + 1)));
    if (count == 0) throw ConfigError("'" + key + "': repeat count must be positive");
    out.insert(out.end(), count, kind);
  }
  if (out.empty()) throw ConfigError("'" + key + "' lists no trunk members");
  return out;
}

}  // namespace

IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside of a section");
    }
    const std::string key = trim(line.substr(0, eq));
    if (doc[section].count(key)) {
      throw ConfigError("duplicate key '" + key + "' in section [" + section + "]");
    }
    doc[section][key] = trim(line.substr(eq + 1));
  }
  return doc;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split(text, ',')) seeds.push_back(to_size("seeds", item));
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  cfg.text = text;
  IniDocument doc = parse_ini(text);
  static const std::set<std::string> known{"data", "model", "train", "eval"};
  for (const auto& [name, kv] : doc) {
    if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");
  }

  {
    Section s("data", doc["data"]);
    auto& d = cfg.data;
    auto& rd = d.rd;
    s.take("generator", [&](const auto&, const auto& v) {
      if (v != "rd2d" && v != "antiderivative") {
        throw ConfigError("unknown generator '" + v + "' (expected rd2d or antiderivative)");
      }
      d.generator = v;
    });
    s.take("n_train", [&](const auto& k, const auto& v) { d.n_train = to_size(k, v); });
    s.take("n_test", [&](const auto& k, const auto& v) { d.n_test = to_size(k, v); });
    s.take("seed", [&](const auto& k, const auto& v) { d.seed = to_size(k, v); });
    s.take("n_modes", [&](const auto& k, const auto& v) { d.n_modes = to_size(k, v); });
    s.take("m", [&](const auto& k, const auto& v) { d.m = to_size(k, v); });
    s.take("n", [&](const auto& k, const auto& v) { rd.n = to_size(k, v); });
    s.take("branch_grid", [&](const auto& k, const auto& v) { rd.branch_grid = to_size(k, v); });
    s.take("nu", [&](const auto& k, const auto& v) { rd.nu = to_double(k, v); });
    s.take("R", [&](const auto& k, const auto& v) { rd.R = to_double(k, v); });
    s.take("k_on_left", [&](const auto& k, const auto& v) { rd.k_on_left = to_double(k, v); });
    s.take("k_off_left", [&](const auto& k, const auto& v) { rd.k_off_left = to_double(k, v); });
    s.take("k_on_right", [&](const auto& k, const auto& v) { rd.k_on_right = to_double(k, v); });
    s.take("k_off_right", [&](const auto& k, const auto& v) { rd.k_off_right = to_double(k, v); });
    s.take("interface", [&](const auto& k, const auto& v) { rd.interface = to_double(k, v); });
    s.take("length", [&](const auto& k, const auto& v) { rd.length = to_double(k, v); });
    s.take("t_final", [&](const auto& k, const auto& v) { rd.t_final = to_double(k, v); });
    s.take("dt", [&](const auto& k, const auto& v) { rd.dt = to_double(k, v); });
    s.finish();
    if (d.n_train == 0) throw ConfigError("data.n_train must be positive");
    if (d.generator == "rd2d") rd.resolved_dt();
    if (d.generator == "antiderivative" && (d.m < 8 || d.n_modes == 0)) {
      throw ConfigError("antiderivative generator needs m >= 8 and n_modes >= 1");
    }
  }

  {
    Section s("model", doc["model"]);
    auto& m = cfg.model;
    auto& pc = m.patches;
    s.take("members", [&](const auto& k, const auto& v) { m.members = parse_members(k, v); });
    s.take("activation", [&](const auto&, const auto& v) { m.activation = parse_activation(v); });
    s.take("branch_hidden", [&](const auto& k, const auto& v) { m.branch_hidden = to_sizes(k, v); });
    s.take("trunk_hidden", [&](const auto& k, const auto& v) { m.trunk_hidden = to_sizes(k, v); });
    s.take("p_vanilla", [&](const auto& k, const auto& v) { m.p_vanilla = to_size(k, v); });
    s.take("p_pod", [&](const auto& k, const auto& v) { m.p_pod = to_size(k, v); });
    s.take("p_pou", [&](const auto& k, const auto& v) { m.p_pou = to_size(k, v); });
    s.take("bias", [&](const auto& k, const auto& v) {
      if (v == "auto") {
        m.bias.reset();
      } else {
        m.bias = to_bool(k, v);
      }
    });
    s.take("patch_grid", [&](const auto& k, const auto& v) { pc.grid = to_sizes(k, v); });
    s.take("patch_box", [&](const auto& k, const auto& v) {
      const auto b = to_doubles(k, v);
      if (b.empty() || b.size() % 2 != 0) {
        throw ConfigError("'" + k + "' expects lo,hi pairs per axis");
      }
      pc.box = {};
      for (std::size_t a = 0; a < b.size(); a += 2) {
        pc.box.lo.push_back(b[a]);
        pc.box.hi.push_back(b[a + 1]);
      }
    });
    s.take("patch_select", [&](const auto& k, const auto& v) { pc.select = to_sizes(k, v); });
    s.take("patch_delta", [&](const auto& k, const auto& v) { pc.delta = to_double(k, v); });
    s.take("patch_radius", [&](const auto& k, const auto& v) { pc.radius = to_double(k, v); });
    s.take("patch_centers", [&](const auto& k, const auto& v) {
      pc.centers.clear();
      for (const auto& c : split(v, ';')) pc.centers.push_back(to_doubles(k, c, ' '));
    });
    s.take("patch_radii", [&](const auto& k, const auto& v) { pc.radii = to_doubles(k, v); });
    s.finish();
    if (m.branch_hidden.empty() || m.trunk_hidden.empty()) {
      throw ConfigError("model needs at least one hidden layer in branch and trunk");
    }
    if (m.p_vanilla == 0 || m.p_pod == 0 || m.p_pou == 0) {
      throw ConfigError("model p values must be positive");
    }
  }

  {
    Section s("train", doc["train"]);
    auto& t = cfg.train;
    s.take("epochs", [&](const auto& k, const auto& v) { t.epochs = to_size(k, v); });
    s.take("batch_size", [&](const auto& k, const auto& v) { t.batch_size = to_size(k, v); });
    s.take("lr", [&](const auto& k, const auto& v) { t.lr0 = to_double(k, v); });
    s.take("decay_rate", [&](const auto& k, const auto& v) { t.decay_rate = to_double(k, v); });
    s.take("decay_steps", [&](const auto& k, const auto& v) { t.decay_steps = to_size(k, v); });
    s.take("optimizer", [&](const auto&, const auto& v) { t.optimizer = parse_optimizer(v); });
    s.take("weight_decay", [&](const auto& k, const auto& v) { t.weight_decay = to_double(k, v); });
    s.take("beta1", [&](const auto& k, const auto& v) { t.adam.beta1 = to_double(k, v); });
    s.take("beta2", [&](const auto& k, const auto& v) { t.adam.beta2 = to_double(k, v); });
    s.take("eps", [&](const auto& k, const auto& v) { t.adam.eps = to_double(k, v); });
    s.take("seeds", [&](const auto&, const auto& v) { cfg.seeds = parse_seed_list(v); });
    s.finish();
    t.validate();
  }

  {
    Section s("eval", doc["eval"]);
    s.take("split", [&](const auto&, const auto& v) {
      if (v != "test" && v != "train" && v != "all") {
        throw ConfigError("eval.split must be test, train or all");
      }
      cfg.eval.split = v;
    });
    s.finish();
  }

  const bool has_pou = std::count(cfg.model.members.begin(), cfg.model.members.end(),
                                   TrunkKind::pou) > 0;
  if (has_pou) {
    const std::size_t d = cfg.data.generator == "antiderivative" ? 1 : 2;
    make_patch_set(cfg.model.patches, d);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

PatchSet make_patch_set(const PatchConfig& cfg, std::size_t dim) {
  std::vector<std::vector<double>> centers = cfg.centers;
  double spacing = 0.0;
  if (centers.empty()) {
    if (cfg.grid.size() != dim || cfg.box.lo.size() != dim) {
      throw ConfigError("PoU member needs patch_grid and patch_box with " + std::to_string(dim) +
                        " axes (or explicit patch_centers)");
    }
    centers = grid_patch_centers(cfg.box, cfg.grid, cfg.select);
    for (std::size_t a = 0; a < dim; ++a) {
      if (cfg.grid[a] > 1) {
        spacing = std::max(spacing, (cfg.box.hi[a] - cfg.box.lo[a]) /
                                        static_cast<double>(cfg.grid[a] - 1));
      }
    }
  }
  for (const auto& c : centers) {
    if (c.size() != dim) {
      throw ConfigError("patch center has " + std::to_string(c.size()) + " coordinates, expected " +
                        std::to_string(dim));
    }
  }
  std::vector<double> radii = cfg.radii;
  if (radii.empty()) {
    double r = cfg.radius;
    if (r <= 0.0) {
      if (spacing <= 0.0) {
        throw ConfigError("cannot derive a patch radius; set patch_radius or patch_radii");
      }
      r = uniform_radius(cfg.delta, spacing, dim);
    }
    radii.assign(centers.size(), r);
  }
  if (radii.size() != centers.size()) {
    throw ConfigError("patch_radii lists " + std::to_string(radii.size()) + " radii for " +
                      std::to_string(centers.size()) + " patches");
  }
  std::vector<Patch> patches;
  for (std::size_t k = 0; k < centers.size(); ++k) patches.push_back({centers[k], radii[k]});
  return PatchSet(std::move(patches), cfg.delta);
}

ModelSpec make_model_spec(const ModelConfig& cfg, std::size_t d_v, std::size_t n_x) {
  ModelSpec spec;
  MLPConfig trunk;
  trunk.input_dim = d_v;
  trunk.hidden_widths = cfg.trunk_hidden;
  trunk.activation = cfg.activation;
  trunk.activate_last_layer = true;
  std::optional<PatchSet> patches;
  for (TrunkKind kind : cfg.members) {
    TrunkSpec ts;
    ts.kind = kind;
    ts.mlp = trunk;
    switch (kind) {
      case TrunkKind::vanilla: ts.p = cfg.p_vanilla; break;
      case TrunkKind::pod:
      case TrunkKind::modified_pod: ts.p = cfg.p_pod; break;
      case TrunkKind::pou:
        if (!patches) patches = make_patch_set(cfg.patches, d_v);
        ts.p = cfg.p_pou;
        ts.patches = *patches;
        break;
    }
    ts.mlp.output_dim = ts.p;
    spec.members.push_back(std::move(ts));
  }
  spec.branch.input_dim = n_x;
  spec.branch.hidden_widths = cfg.branch_hidden;
  spec.branch.activation = cfg.activation;
  spec.branch.activate_last_layer = false;
  spec.bias = cfg.bias;
  return spec;
}

OperatorDataset generate_dataset(const DataConfig& cfg) {
  const std::size_t total = cfg.n_train + cfg.n_test;
  OperatorDataset ds = cfg.generator == "antiderivative"
                           ? gen_antiderivative(total, cfg.n_modes, cfg.m, cfg.seed)
                           : gen_reaction_diffusion_2d(cfg.rd, total, cfg.seed);
  ds.metadata["n_train"] = std::to_string(cfg.n_train);
  return ds;
}

std::string model_label(const ModelConfig& cfg) {
  std::string out;
  for (std::size_t i = 0; i < cfg.members.size();) {
    std::size_t j = i;
    while (j < cfg.members.size() && cfg.members[j] == cfg.members[i]) ++j;
    if (!out.empty()) out += "+";
    out += to_string(cfg.members[i]);
    if (j - i > 1) out += "*" + std::to_string(j - i);
    i = j;
  }
  return out;
}

}  // namespace odn
