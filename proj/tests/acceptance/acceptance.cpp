// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance [--only <name>] [--list]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "odn/checkpoint.hpp"
#include "odn/config.hpp"
#include "odn/dataset.hpp"
#include "odn/evaluation.hpp"
#include "odn/generators.hpp"
#include "odn/partition.hpp"
#include "odn/pod.hpp"
#include "odn/random.hpp"
#include "odn/training.hpp"
#include "odn/trunks.hpp"

using namespace odn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

// -- partition of unity ------------------------------------------------------

Outcome pou_invariant() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst_sum = 0.0;
  bool in_range = true;
  std::size_t total = 0;
  for (std::size_t d : {2u, 3u}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Patch> patches;
      const int P = 3 + static_cast<int>(rng.uniform() * 10);
      for (int k = 0; k < P; ++k) {
        Patch p;
        for (std::size_t a = 0; a < d; ++a) p.center.push_back(rng.uniform());
        p.radius = rng.uniform(0.15, 0.6);
        patches.push_back(p);
      }
      const PatchSet ps(patches);
      std::size_t accepted = 0;
      std::vector<double> y(d);
      while (accepted < 300) {
        for (auto& v : y) v = rng.uniform(-0.2, 1.2);
        bool covered = false;
        for (const auto& p : ps.patches()) covered = covered || kernel_value(p, y) > 0.0;
        if (!covered) continue;
        const auto w = pou_weights(ps, y);
        double s = 0.0;
        for (double wk : w) {
          s += wk;
          in_range = in_range && wk >= 0.0 && wk <= 1.0;
        }
        worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        ++accepted;
      }
      total += accepted;
    }
  }
  const double secs = seconds_since(t0);
  return {total >= 1000 && worst_sum < 1e-12 && in_range && secs < 1.0,
          std::to_string(total) + " points, max |sum-1| = " + fmt("%.3g", worst_sum) +
              ", weights in [0,1]: " + (in_range ? "yes" : "no") + ", " + fmt("%.3f", secs) + " s"};
}

Outcome wendland() {
  const auto t0 = Clock::now();
  const bool exact = wendland_c2(0.0) == 1.0 && wendland_c2(1.0) == 0.0 &&
                     wendland_c2(1.0 + 1e-12) == 0.0 && wendland_c2(1.5) == 0.0 &&
                     wendland_c2(1e6) == 0.0;
  const double h = 1e-4;
  const double d1 = (wendland_c2(1.0 + h) - wendland_c2(1.0 - h)) / (2.0 * h);
  const double d2 = (wendland_c2(1.0 + h) - 2.0 * wendland_c2(1.0) + wendland_c2(1.0 - h)) / (h * h);
  const double secs = seconds_since(t0);
  return {exact && std::abs(d1) < 1e-6 && std::abs(d2) < 1e-6 && secs < 1.0,
          std::string("exact values ") + (exact ? "ok" : "wrong") + ", psi'(1) ~ " +
              fmt("%.3g", d1) + ", psi''(1) ~ " + fmt("%.3g", d2)};
}

// -- autodiff ----------------------------------------------------------------

Outcome gradient_check() {
  const auto t0 = Clock::now();
  Rng rng(77);
  const Activation acts[] = {Activation::relu, Activation::leaky_relu, Activation::tanh};
  double worst = 0.0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    MLPConfig cfg;
    cfg.input_dim = 1 + static_cast<std::size_t>(rng.uniform() * 4);
    const std::size_t depth = 1 + static_cast<std::size_t>(rng.uniform() * 3);
    for (std::size_t l = 0; l < depth; ++l)
      cfg.hidden_widths.push_back(1 + static_cast<std::size_t>(rng.uniform() * 16));
    cfg.output_dim = 1 + static_cast<std::size_t>(rng.uniform() * 4);
    cfg.activation = acts[trial % 3];
    cfg.activate_last_layer = trial % 2 == 1;
    MLP net = init_mlp(cfg, 1000 + trial);
    // nonzero biases so every entry is exercised
    for (auto& layer : net.layers())
      for (auto& b : layer.bias.mutable_data()) b = rng.uniform(-0.5, 0.5);

    const std::size_t B = 6;
    const Tensor x = Tensor::from_matrix(random_matrix(B, cfg.input_dim, rng));
    const Tensor r = Tensor::from_matrix(random_matrix(B, cfg.output_dim, rng));
    auto loss = [&] { return sum(mul(net.forward(x), r)); };

    std::vector<Parameter> params;
    net.collect_parameters("net", params);
    Tape tape;
    {
      TapeGuard guard(tape);
      tape.backward(loss());
    }
    for (auto& p : params) {
      std::vector<double> g(p.tensor.grad().begin(), p.tensor.grad().end());
      if (g.empty()) g.assign(p.tensor.size(), 0.0);
      auto w = p.tensor.mutable_data();
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double keep = w[i];
        auto at = [&](double off) {
          w[i] = keep + off;
          return loss().item();
        };
        const double l0 = at(0.0);
        double fd = 0.0;
        if (cfg.activation == Activation::tanh) {
          const double h = 1e-3;
          fd = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
        } else {
          // piecewise linear: largest step whose one-sided slopes agree, so
          // no kink lies inside the stencil
          for (double h : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
            const double fwd = (at(h) - l0) / h, bwd = (l0 - at(-h)) / h;
            fd = 0.5 * (fwd + bwd);
            if (std::abs(fwd - bwd) <= 64 * 2.2e-16 * std::max(1.0, std::abs(l0)) / h) break;
          }
        }
        w[i] = keep;
        const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-8});
        worst = std::max(worst, std::abs(fd - g[i]) / denom);
        ++checked;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-5 && secs < 30.0, std::to_string(checked) +
                                           " parameter entries, worst relative error " +
                                           fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

// -- POD ---------------------------------------------------------------------

Outcome pod() {
  const auto t0 = Clock::now();
  Rng rng(5);
  const Matrix S = random_matrix(10, 50, rng, -3.0, 4.0);
  Matrix Y(50, 1);
  for (std::size_t j = 0; j < 50; ++j) Y(j, 0) = static_cast<double>(j) / 49.0;
  const PODBasis b = compute_pod(Y, S, 10, false);

  double ortho = 0.0;
  for (std::size_t m = 0; m < b.n_modes(); ++m)
    for (std::size_t k = 0; k < b.n_modes(); ++k) {
      double dot = 0.0;
      for (std::size_t j = 0; j < 50; ++j) dot += b.modes(j, m) * b.modes(j, k);
      ortho = std::max(ortho, std::abs(dot - (m == k ? 1.0 : 0.0)));
    }
  bool descending = true;
  for (std::size_t i = 1; i < b.eigenvalues.size(); ++i)
    descending = descending && b.eigenvalues[i] <= b.eigenvalues[i - 1];

  // standardize independently: population sigma per row
  double frob = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    double mu = 0.0, sq = 0.0;
    for (double v : S.row(i)) mu += v;
    mu /= 50.0;
    for (double v : S.row(i)) sq += (v - mu) * (v - mu);
    const double sigma = std::sqrt(sq / 50.0);
    std::vector<double> v(50), rec(50, 0.0);
    for (std::size_t j = 0; j < 50; ++j) v[j] = (S(i, j) - mu) / sigma;
    for (std::size_t m = 0; m < b.n_modes(); ++m) {
      double c = 0.0;
      for (std::size_t j = 0; j < 50; ++j) c += v[j] * b.modes(j, m);
      for (std::size_t j = 0; j < 50; ++j) rec[j] += c * b.modes(j, m);
    }
    for (std::size_t j = 0; j < 50; ++j) frob += (rec[j] - v[j]) * (rec[j] - v[j]);
  }
  frob = std::sqrt(frob);
  const double secs = seconds_since(t0);
  return {ortho < 1e-10 && descending && frob < 1e-8 && secs < 1.0,
          "orthonormality " + fmt("%.3g", ortho) + ", descending " + (descending ? "yes" : "no") +
              ", reconstruction " + fmt("%.3g", frob)};
}

// -- ensembles ---------------------------------------------------------------

MLPConfig mlp(std::size_t in, std::vector<std::size_t> hidden, std::size_t out, bool last) {
  MLPConfig c;
  c.input_dim = in;
  c.hidden_widths = std::move(hidden);
  c.output_dim = out;
  c.activation = Activation::tanh;
  c.activate_last_layer = last;
  return c;
}

struct Problem {
  Matrix Y;        // 2D grid
  Matrix U;        // input functions
  Matrix V;        // snapshots
  PatchSet patches;
};

Problem small_problem() {
  Problem pr;
  const std::size_t g = 16;
  pr.Y = cell_centers_2d(g, 2.0);
  Rng rng(11);
  pr.U = random_matrix(12, 9, rng);
  pr.V = Matrix(12, g * g);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < g * g; ++j)
      pr.V(i, j) = pr.U(i, 0) * std::sin(pr.Y(j, 0)) + pr.U(i, 1) * std::cos(2 * pr.Y(j, 1)) +
                   0.3 * rng.uniform();
  PatchConfig pc;
  pc.grid = {2, 3};
  pc.box = Box{{0.5, 1.0 / 3.0}, {1.5, 5.0 / 3.0}};
  pc.delta = 0.1;
  pr.patches = make_patch_set(pc, 2);
  return pr;
}

// Dense reference for one member: every expert on every row, no gathering.
Matrix standalone_trunk(const TrunkMember& m, const Matrix& Y) {
  if (const auto* v = std::get_if<VanillaTrunk>(&m)) {
    return v->net.forward(Tensor::from_matrix(Y)).to_matrix();
  }
  if (const auto* pod = std::get_if<PodTrunk>(&m)) {
    const auto idx = pod_indices(*pod->basis, Y);
    return pod_trunk_matrix(*pod->basis, idx);
  }
  const auto& pou = std::get<PouTrunk>(m);
  const Matrix W = pou_weight_matrix(pou.patches, Y);
  Matrix out(Y.rows, member_width(m));
  for (std::size_t k = 0; k < pou.experts.size(); ++k) {
    const Matrix t = pou.experts[k].forward(Tensor::from_matrix(Y)).to_matrix();
    for (std::size_t i = 0; i < Y.rows; ++i)
      for (std::size_t c = 0; c < out.cols; ++c) out(i, c) += W(i, k) * t(i, c);
  }
  return out;
}

Outcome ensemble_of_one() {
  const auto t0 = Clock::now();
  const Problem pr = small_problem();
  double worst = 0.0;
  for (TrunkKind kind :
       {TrunkKind::vanilla, TrunkKind::pod, TrunkKind::modified_pod, TrunkKind::pou}) {
    TrunkSpec t;
    t.kind = kind;
    t.p = kind == TrunkKind::vanilla || kind == TrunkKind::pou ? 7 : 5;
    t.mlp = mlp(2, {12, 12}, t.p, true);
    if (kind == TrunkKind::pou) t.patches = pr.patches;
    ModelSpec spec;
    spec.branch = mlp(9, {12, 12}, 1, false);
    spec.members = {t};
    EnsembleModel model = build_ensemble(spec, pr.Y, pr.V, 3);
    if (model.has_bias()) model.bias().mutable_data()[0] = 0.37;
    const Matrix G = model.predict(pr.U, pr.Y).to_matrix();

    const Matrix b = model.branch().forward(Tensor::from_matrix(pr.U)).to_matrix();
    const Matrix tr = standalone_trunk(model.members()[0], pr.Y);
    const PODBasis* offset = model.offset_basis();
    for (std::size_t i = 0; i < pr.U.rows; ++i)
      for (std::size_t j = 0; j < pr.Y.rows; ++j) {
        double s = model.has_bias() ? 0.37 : 0.0;
        for (std::size_t c = 0; c < tr.cols; ++c) s += b(i, c) * tr(j, c);
        if (offset) s += offset->mean[j];
        worst = std::max(worst, std::abs(s - G(i, j)));
      }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-14 && secs < 1.0,
          "max deviation over vanilla/pod/modified_pod/pou " + fmt("%.3g", worst)};
}

Outcome pou_locality() {
  const auto t0 = Clock::now();
  set_deterministic(true);
  const Problem pr = small_problem();
  TrunkSpec pod;
  pod.kind = TrunkKind::modified_pod;
  pod.p = 4;
  TrunkSpec pou;
  pou.kind = TrunkKind::pou;
  pou.p = 6;
  pou.mlp = mlp(2, {10}, 6, true);
  pou.patches = pr.patches;
  ModelSpec spec;
  spec.branch = mlp(9, {10}, 1, false);
  spec.members = {pod, pou};
  const EnsembleModel base = build_ensemble(spec, pr.Y, pr.V, 9);
  const Matrix G0 = base.predict(pr.U, pr.Y).to_matrix();
  const Matrix W = pou_weight_matrix(pr.patches, pr.Y);

  bool local = true;
  std::size_t changed_inside = 0, inside = 0, outside = 0;
  Rng rng(4);
  for (std::size_t k = 0; k < pr.patches.size(); ++k) {
    EnsembleModel m = base.clone();
    auto& expert = std::get<PouTrunk>(m.members()[1]).experts[k];
    for (auto& layer : expert.layers()) {
      for (auto& w : layer.weight.mutable_data()) w += rng.uniform(-0.3, 0.3);
      for (auto& b : layer.bias.mutable_data()) b += rng.uniform(-0.3, 0.3);
    }
    const Matrix G = m.predict(pr.U, pr.Y).to_matrix();
    for (std::size_t j = 0; j < pr.Y.rows; ++j) {
      for (std::size_t i = 0; i < pr.U.rows; ++i) {
        const bool differs = G(i, j) != G0(i, j);
        if (W(j, k) == 0.0) {
          ++outside;
          local = local && !differs;
        } else {
          ++inside;
          changed_inside += differs ? 1 : 0;
        }
      }
    }
  }
  set_deterministic(false);
  const double secs = seconds_since(t0);
  return {local && changed_inside > 0 && outside > 0 && secs < 5.0,
          std::string("outside-support entries unchanged: ") + (local ? "all" : "NOT all") + " (" +
              std::to_string(outside) + "), changed inside " + std::to_string(changed_inside) +
              "/" + std::to_string(inside)};
}

// -- end to end --------------------------------------------------------------

std::string config_path(const std::string& name) {
  return std::string(ODN_CONFIG_DIR) + "/" + name;
}

struct RunResult {
  double test_pct = 0.0;
  double epoch_seconds = 0.0;
};

RunResult run_config(const RunConfig& cfg, const OperatorDataset& ds, std::uint64_t seed,
                     std::size_t epochs_override = 0) {
  const std::size_t n_train = ds.n_train(cfg.data.n_train);
  const ModelSpec spec = make_model_spec(cfg.model, ds.Y.cols, ds.n_x());
  EnsembleModel model = build_ensemble(spec, ds.Y, ds.V.slice_rows(0, n_train), seed);
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  if (epochs_override) tc.epochs = epochs_override;
  const TrainReport rep = train(model, ds, tc);
  std::vector<double> secs = rep.seconds;
  std::nth_element(secs.begin(), secs.begin() + secs.size() / 2, secs.end());
  RunResult r;
  r.epoch_seconds = secs[secs.size() / 2];
  r.test_pct = evaluate(model, ds, n_train, ds.size() - n_train).mean_pct;
  return r;
}

Outcome antiderivative() {
  const auto t0 = Clock::now();
  const RunConfig cfg = load_run_config(config_path("antiderivative.ini"));
  const auto& mc = cfg.model;
  const bool matches =
      cfg.data.generator == "antiderivative" && cfg.data.n_train == 200 &&
      cfg.data.n_test == 40 && mc.members == std::vector<TrunkKind>{TrunkKind::vanilla} &&
      mc.branch_hidden == std::vector<std::size_t>{64, 64, 64} &&
      mc.trunk_hidden == std::vector<std::size_t>{64, 64, 64} && mc.p_vanilla == 32 &&
      cfg.train.epochs == 2000 && cfg.train.optimizer == OptimizerKind::adam &&
      cfg.train.lr0 == 1e-3;
  const OperatorDataset ds = generate_dataset(cfg.data);
  const RunResult r = run_config(cfg, ds, cfg.seeds.at(0));
  const double secs = seconds_since(t0);
  return {matches && r.test_pct < 5.0 && secs < 300.0,
          std::string("config ") + (matches ? "as specified" : "DIFFERS") +
              ", test relative l2 " + fmt("%.3g", r.test_pct) + "%, " + fmt("%.1f", secs) + " s"};
}

bool rd_setup_matches(const RunConfig& cfg) {
  return cfg.data.generator == "rd2d" && cfg.data.rd.n == 32 && cfg.data.n_train == 200 &&
         cfg.data.n_test == 40 && cfg.train.epochs == 5000 &&
         cfg.train.optimizer == OptimizerKind::adamw && cfg.seeds.size() == 3;
}

Outcome rd_ordering() {
  const auto t0 = Clock::now();
  const RunConfig van = load_run_config(config_path("rd2d_vanilla.ini"));
  const RunConfig pp = load_run_config(config_path("rd2d_pod_pou.ini"));
  const bool matches = rd_setup_matches(van) && rd_setup_matches(pp) &&
                       van.model.members == std::vector<TrunkKind>{TrunkKind::vanilla} &&
                       std::count(pp.model.members.begin(), pp.model.members.end(),
                                  TrunkKind::pou) == 1;
  const OperatorDataset dv = generate_dataset(van.data);
  const OperatorDataset dp = generate_dataset(pp.data);
  const bool same_data = dv == dp;
  std::ostringstream detail;
  double mv = 0.0, mp = 0.0;
  for (std::uint64_t s : van.seeds) {
    const double e = run_config(van, dv, s).test_pct;
    detail << "vanilla seed " << s << " " << fmt("%.3g", e) << "%; ";
    mv += e;
  }
  for (std::uint64_t s : pp.seeds) {
    const double e = run_config(pp, dp, s).test_pct;
    detail << "pod-pou seed " << s << " " << fmt("%.3g", e) << "%; ";
    mp += e;
  }
  mv /= static_cast<double>(van.seeds.size());
  mp /= static_cast<double>(pp.seeds.size());
  const double secs = seconds_since(t0);
  detail << "mean vanilla " << fmt("%.3g", mv) << "%, pod-pou " << fmt("%.3g", mp)
         << "%, ratio " << fmt("%.3f", mp / mv) << ", " << fmt("%.0f", secs) << " s";
  if (!matches) detail << " (config DIFFERS)";
  if (!same_data) detail << " (datasets differ)";
  return {matches && same_data && mp <= 0.9 * mv && secs < 45.0 * 60.0, detail.str()};
}

Outcome training_cost() {
  const RunConfig van = load_run_config(config_path("rd2d_vanilla.ini"));
  const OperatorDataset ds = generate_dataset(van.data);
  const std::size_t epochs = 40;
  const double tv = run_config(van, ds, 0, epochs).epoch_seconds;
  std::ostringstream detail;
  detail << "median epoch: vanilla " << fmt("%.3g", tv * 1e3) << " ms";
  bool pass = true;
  for (const char* name : {"rd2d_pod_pou.ini", "rd2d_vanilla_pou.ini", "rd2d_vanilla_pod_pou.ini"}) {
    const RunConfig cfg = load_run_config(config_path(name));
    const double t = run_config(cfg, ds, 0, epochs).epoch_seconds;
    detail << ", " << model_label(cfg.model) << " " << fmt("%.3g", t * 1e3) << " ms";
    pass = pass && t > tv;
  }
  return {pass, detail.str()};
}

// -- formats -----------------------------------------------------------------

Outcome file_formats() {
  const auto t0 = Clock::now();
  RDParams p;
  p.n = 16;
  p.branch_grid = 4;
  OperatorDataset ds = gen_reaction_diffusion_2d(p, 12, 3);
  ds.metadata["n_train"] = "10";
  const auto bytes = encode_dataset(ds);
  const OperatorDataset back = decode_dataset(bytes);
  bool ok = back == ds && encode_dataset(back) == bytes;

  const Problem pr = small_problem();
  TrunkSpec a;
  a.kind = TrunkKind::modified_pod;
  a.p = 4;
  TrunkSpec b;
  b.kind = TrunkKind::pou;
  b.p = 5;
  b.mlp = mlp(2, {8}, 5, true);
  b.patches = pr.patches;
  TrunkSpec c;
  c.kind = TrunkKind::vanilla;
  c.p = 3;
  c.mlp = mlp(2, {8}, 3, true);
  ModelSpec spec;
  spec.branch = mlp(9, {8}, 1, false);
  spec.members = {a, b, c};
  const Checkpoint ck{"[train]\nepochs = 1\n", 42, build_ensemble(spec, pr.Y, pr.V, 42)};
  const auto mbytes = encode_checkpoint(ck);
  const Checkpoint mback = decode_checkpoint(mbytes);
  ok = ok && encode_checkpoint(mback) == mbytes &&
       mback.model.predict(pr.U, pr.Y).to_matrix() == ck.model.predict(pr.U, pr.Y).to_matrix();

  std::size_t rejected = 0, tried = 0;
  for (const auto* buf : {&bytes, &mbytes}) {
    for (std::size_t pos = 0; pos < buf->size(); pos += 97) {
      auto bad = *buf;
      bad[pos] ^= 0x01;
      ++tried;
      try {
        if (buf == &bytes) {
          decode_dataset(bad);
        } else {
          decode_checkpoint(bad);
        }
      } catch (const FormatError&) {
        ++rejected;
      }
    }
    auto cut = *buf;
    cut.pop_back();
    ++tried;
    try {
      if (buf == &bytes) {
        decode_dataset(cut);
      } else {
        decode_checkpoint(cut);
      }
    } catch (const FormatError&) {
      ++rejected;
    }
  }
  const double secs = seconds_since(t0);
  return {ok && rejected == tried && secs < 1.0,
          std::string("round trips ") + (ok ? "bit-exact" : "DIFFER") + ", corrupted files rejected " +
              std::to_string(rejected) + "/" + std::to_string(tried) + ", " + fmt("%.3f", secs) +
              " s"};
}

// -- solver ------------------------------------------------------------------

std::vector<double> restrict2(const std::vector<double>& fine, std::size_t n_fine) {
  const std::size_t n = n_fine / 2;
  std::vector<double> out(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      out[j * n + i] = 0.25 * (fine[2 * j * n_fine + 2 * i] + fine[2 * j * n_fine + 2 * i + 1] +
                               fine[(2 * j + 1) * n_fine + 2 * i] +
                               fine[(2 * j + 1) * n_fine + 2 * i + 1]);
  return out;
}

double rms_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

Outcome rd_convergence() {
  const auto t0 = Clock::now();
  RDParams p;
  std::vector<std::vector<double>> sol;
  for (std::size_t n : {16u, 32u, 64u}) {
    p.n = n;
    sol.push_back(solve_reaction_diffusion_2d(p, 0.7));
  }
  const double e1 = rms_diff(sol[0], restrict2(sol[1], 32));
  const double e2 = rms_diff(sol[1], restrict2(sol[2], 64));
  const double ratio = e1 / e2;

  RDParams d;
  d.n = 32;
  d.k_on_left = d.k_off_left = d.k_on_right = d.k_off_right = 0.0;
  Rng rng(8);
  std::vector<double> init(d.n * d.n);
  for (auto& v : init) v = rng.uniform(0.0, 2.0);
  const double h2 = d.spacing() * d.spacing();
  double m0 = 0.0, m1 = 0.0;
  for (double v : init) m0 += v * h2;
  for (double v : solve_reaction_diffusion_2d(d, init)) m1 += v * h2;
  const double drift = std::abs(m1 - m0);
  const double secs = seconds_since(t0);
  return {ratio > 3.0 && ratio < 5.0 && drift < 1e-10 && secs < 60.0,
          "error ratio " + fmt("%.3f", ratio) + " (" + fmt("%.3g", e1) + " / " + fmt("%.3g", e2) +
              "), mass drift " + fmt("%.3g", drift) + " of " + fmt("%.6g", m0) + ", " +
              fmt("%.2f", secs) + " s"};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"pou_invariant", pou_invariant},   {"wendland", wendland},
      {"gradient_check", gradient_check}, {"pod", pod},
      {"ensemble_of_one", ensemble_of_one}, {"pou_locality", pou_locality},
      {"antiderivative", antiderivative}, {"rd_ordering", rd_ordering},
      {"training_cost", training_cost},   {"file_formats", file_formats},
      {"rd_convergence", rd_convergence},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = argv[++i];
    } else if (std::strcmp(argv[i], "--list") == 0) {
      for (const auto& c : criteria()) std::cout << c.name << "\n";
      return 0;
    } else {
      std::cerr << "usage: acceptance [--only <name>] [--list]\n";
      return 2;
    }
  }
  bool any = false, all_pass = true;
  for (const auto& c : criteria()) {
    if (!only.empty() && only != c.name) continue;
    any = true;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
    all_pass = all_pass && o.pass;
  }
  if (!any) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
