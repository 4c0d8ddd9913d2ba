// SPDX-License-Identifier: Apache-2.0
#include "odn/commands.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <Eigen/Core>

#include "odn/binary_io.hpp"
#include "odn/checkpoint.hpp"
#include "odn/dataset.hpp"

namespace odn {

namespace fs = std::filesystem;

int exit_code(const std::exception& e) {
  if (const auto* job = dynamic_cast<const JobError*>(&e)) return job->code();
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const CoverageError*>(&e) ||
      dynamic_cast<const IndexError*>(&e) || dynamic_cast<const DegenerateError*>(&e) ||
      dynamic_cast<const DomainError*>(&e)) {
    return kExitData;
  }
  return kExitFailure;
}

void apply_environment() {
  const char* v = std::getenv("ODN_DETERMINISTIC");
  if (v != nullptr && std::string(v) != "0" && std::string(v) != "") set_deterministic(true);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return fs::path(p.string() + suffix);
}

std::string manifest_text(const RunConfig& cfg, std::uint64_t seed, const fs::path& dataset,
                          const TrainReport& report) {
  std::ostringstream os;
  os << "odn " << kVersion << "\n";
  os << "eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
     << EIGEN_MINOR_VERSION << "\n";
#if defined(__clang__)
  os << "compiler clang " << __clang_major__ << "." << __clang_minor__ << "\n";
#elif defined(__GNUC__)
  os << "compiler gcc " << __GNUC__ << "." << __GNUC_MINOR__ << "\n";
#endif
  os << "seed " << seed << "\n";
  os << "dataset " << dataset.string() << "\n";
  os << "deterministic " << (deterministic() ? 1 : 0) << "\n";
  os << "epochs " << report.loss.size() << "\n";
  os << std::setprecision(17);
  if (!report.loss.empty()) os << "final_loss " << report.loss.back() << "\n";
  os << "mean_epoch_seconds " << report.mean_epoch_seconds() << "\n";
  os << "parameters " << report.snapshot_id << "\n";
  os << "--- config ---\n" << cfg.text;
  if (!cfg.text.empty() && cfg.text.back() != '\n') os << "\n";
  return os.str();
}

void write_loss_csv(const fs::path& ckpt, const TrainReport& report) {
  std::ostringstream os;
  report.write_csv(os);
  write_text(with_suffix(ckpt, ".loss.csv"), os.str());
}

fs::path train_seed(const RunConfig& cfg, const OperatorDataset& ds, const fs::path& dataset_path,
                    const fs::path& out, std::uint64_t seed, bool quiet, std::ostream& log) {
  const std::size_t n_train = ds.n_train(cfg.data.n_train);
  if (n_train == 0) throw DimensionError("dataset has an empty training split");
  const Matrix V_train = ds.V.slice_rows(0, n_train);
  const ModelSpec spec = make_model_spec(cfg.model, ds.Y.cols, ds.n_x());
  EnsembleModel model = build_ensemble(spec, ds.Y, V_train, seed);

  TrainConfig tc = cfg.train;
  tc.seed = seed;
  const std::size_t every = std::max<std::size_t>(1, tc.epochs / 10);
  EpochCallback progress;
  if (!quiet) {
    progress = [&](std::size_t epoch, double loss, double lr) {
      if ((epoch + 1) % every == 0 || epoch == 0) {
        log << "seed " << seed << " epoch " << epoch + 1 << "/" << tc.epochs << " loss "
            << std::setprecision(6) << loss << " lr " << lr << "\n"
            << std::flush;
      }
    };
  }
  TrainReport report;
  try {
    report = train(model, ds, tc, progress, &report);
  } catch (const NumericError&) {
    write_loss_csv(out, report);
    throw;
  }
  write_checkpoint(Checkpoint{cfg.text, seed, model}, out);
  write_loss_csv(out, report);
  write_text(with_suffix(out, ".manifest.txt"), manifest_text(cfg, seed, dataset_path, report));
  if (!quiet) {
    log << "seed " << seed << ": wrote " << out.string() << " (mean epoch "
        << format_sig3(report.mean_epoch_seconds() * 1e3) << " ms, parameters "
        << report.snapshot_id << ")\n";
  }
  return out;
}

std::pair<std::size_t, std::size_t> split_range(const OperatorDataset& ds, const std::string& split) {
  const std::size_t n_train = ds.n_train(ds.size());
  if (split == "train") return {0, n_train};
  if (split == "all") return {0, ds.size()};
  if (split == "test") return {n_train, ds.size() - n_train};
  throw ConfigError("unknown split '" + split + "' (expected test, train or all)");
}

RunConfig stored_config(const Checkpoint& ckpt) {
  if (ckpt.config_text.empty()) return RunConfig{};
  return parse_run_config(ckpt.config_text);
}

}  // namespace

std::uint32_t cmd_gen(const GenOptions& opt, std::ostream& log) {
  RunConfig cfg = load_run_config(opt.config);
  if (opt.n_train) cfg.data.n_train = *opt.n_train;
  if (opt.n_test) cfg.data.n_test = *opt.n_test;
  if (opt.seed) cfg.data.seed = *opt.seed;
  if (cfg.data.n_train == 0) throw ConfigError("n_train must be positive");
  if (fs::exists(opt.out) && !opt.force) {
    throw IoError("refusing to overwrite '" + opt.out.string() + "' (use --force)");
  }
  const OperatorDataset ds = generate_dataset(cfg.data);
  const auto bytes = encode_dataset(ds);
  write_file(opt.out, bytes);
  const std::uint32_t crc = crc32(std::span(bytes).first(bytes.size() - 4));
  log << "wrote " << opt.out.string() << ": N=" << ds.size() << " N_x=" << ds.n_x()
      << " N_y=" << ds.n_y() << " crc32=" << std::hex << std::setw(8) << std::setfill('0') << crc
      << std::dec << std::setfill(' ') << "\n";
  return crc;
}

fs::path seed_output_path(const fs::path& out, std::uint64_t seed, bool multi) {
  if (!multi) return out;
  fs::path p = out;
  const std::string ext = out.extension().string();
  p.replace_extension();
  return fs::path(p.string() + ".seed" + std::to_string(seed) + ext);
}

std::vector<fs::path> cmd_train(const TrainOptions& opt, std::ostream& log) {
  RunConfig cfg = load_run_config(opt.config);
  if (opt.seeds) cfg.seeds = *opt.seeds;
  if (opt.epochs) cfg.train.epochs = *opt.epochs;
  if (opt.lr) cfg.train.lr0 = *opt.lr;
  cfg.train.validate();
  if (cfg.seeds.empty()) throw ConfigError("no seeds to train");
  if (opt.jobs == 0) throw ConfigError("--jobs must be positive");
  const OperatorDataset ds = read_dataset(opt.dataset);

  const bool multi = cfg.seeds.size() > 1;
  std::vector<fs::path> outputs;
  for (auto s : cfg.seeds) outputs.push_back(seed_output_path(opt.out, s, multi));

  if (opt.jobs == 1 || !multi) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      train_seed(cfg, ds, opt.dataset, outputs[i], cfg.seeds[i], opt.quiet, log);
    }
    return outputs;
  }

  // One process per seed, at most opt.jobs at a time.
  log << std::flush;
  std::cout << std::flush;
  std::cerr << std::flush;
  std::size_t next = 0;
  std::size_t running = 0;
  int worst = kExitOk;
  std::string failures;
  auto reap = [&] {
    int status = 0;
    const pid_t pid = ::wait(&status);
    if (pid < 0) throw IoError("wait() failed while collecting training jobs");
    --running;
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : kExitFailure;
    if (code != kExitOk) {
      worst = std::max(worst, code);
      failures += " pid " + std::to_string(pid) + " exit " + std::to_string(code) + ";";
    }
  };
  while (next < cfg.seeds.size() || running > 0) {
    if (next < cfg.seeds.size() && running < opt.jobs) {
      const pid_t pid = ::fork();
      if (pid < 0) throw IoError("fork() failed");
      if (pid == 0) {
        int code = kExitOk;
        try {
          std::ostringstream buf;
          train_seed(cfg, ds, opt.dataset, outputs[next], cfg.seeds[next], opt.quiet, buf);
          std::cerr << buf.str();
        } catch (const std::exception& e) {
          std::cerr << "error (seed " << cfg.seeds[next] << "): " << e.what() << "\n";
          code = exit_code(e);
        }
        std::cerr << std::flush;
        ::_exit(code);
      }
      ++next;
      ++running;
    } else {
      reap();
    }
  }
  if (worst != kExitOk) throw JobError("training jobs failed:" + failures, worst);
  return outputs;
}

EvalReport cmd_eval(const EvalOptions& opt, std::ostream& out) {
  const Checkpoint ckpt = read_checkpoint(opt.checkpoint);
  const RunConfig cfg = stored_config(ckpt);
  const OperatorDataset ds = read_dataset(opt.dataset);
  const std::string split = opt.split.empty() ? cfg.eval.split : opt.split;
  const auto [first, count] = split_range(ds, split);
  if (count == 0) throw IndexError("split '" + split + "' of the dataset is empty");
  const EvalReport report = evaluate(ckpt.model, ds, first, count);
  if (!opt.csv.empty()) {
    std::ostringstream os;
    report.write_csv(os);
    write_text(opt.csv, os.str());
  }
  if (!opt.spatial_csv.empty()) {
    std::ostringstream os;
    os << "point";
    for (std::size_t a = 0; a < ds.Y.cols; ++a) os << ",y" << a;
    os << ",mse\n" << std::setprecision(17);
    for (std::size_t i = 0; i < ds.n_y(); ++i) {
      os << i;
      for (std::size_t a = 0; a < ds.Y.cols; ++a) os << "," << ds.Y(i, a);
      os << "," << report.spatial_mse[i] << "\n";
    }
    write_text(opt.spatial_csv, os.str());
  }
  out << report.summary_line(opt.dataset.stem().string(), model_label(cfg.model)) << "\n";
  return report;
}

void cmd_export_basis(const ExportBasisOptions& opt, std::ostream& out) {
  const Checkpoint ckpt = read_checkpoint(opt.checkpoint);
  const OperatorDataset ds = read_dataset(opt.dataset);
  std::vector<std::size_t> columns = opt.columns;
  if (columns.empty()) {
    for (std::size_t c = 0; c < ckpt.model.total_width(); ++c) columns.push_back(c);
  }
  std::vector<std::vector<double>> values;
  for (auto c : columns) values.push_back(ckpt.model.export_basis(ds.Y, c));
  std::ostringstream os;
  for (std::size_t a = 0; a < ds.Y.cols; ++a) os << (a ? "," : "") << "y" << a;
  for (auto c : columns) os << ",col" << c;
  os << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < ds.n_y(); ++i) {
    for (std::size_t a = 0; a < ds.Y.cols; ++a) os << (a ? "," : "") << ds.Y(i, a);
    for (const auto& v : values) os << "," << v[i];
    os << "\n";
  }
  if (opt.out.empty()) {
    out << os.str();
  } else {
    write_text(opt.out, os.str());
  }
}

void cmd_inspect(const fs::path& path, std::ostream& out) {
  const auto bytes = read_file(path);
  const std::string magic(bytes.begin(), bytes.begin() + std::min<std::size_t>(8, bytes.size()));
  if (magic == std::string_view(kDatasetMagic, 8)) {
    const OperatorDataset ds = decode_dataset(bytes);
    out << "format: ODN1 v" << kDatasetVersion << "\n";
    out << "d_u: " << ds.X.cols << "\nd_v: " << ds.Y.cols << "\nN_x: " << ds.n_x()
        << "\nN_y: " << ds.n_y() << "\nN: " << ds.size() << "\ncomponents: " << ds.components
        << "\n";
    out << "crc32: " << std::hex << std::setw(8) << std::setfill('0')
        << crc32(std::span(bytes).first(bytes.size() - 4)) << std::dec << std::setfill(' ')
        << "\n";
    for (const auto& [k, v] : ds.metadata) out << "meta " << k << " = " << v << "\n";
    return;
  }
  if (magic == std::string_view(kModelMagic, 8)) {
    out << describe_checkpoint(decode_checkpoint(bytes));
    return;
  }
  throw FormatError("'" + path.string() + "' is neither an ODN1 dataset nor an ODM1 checkpoint");
}

}  // namespace odn
