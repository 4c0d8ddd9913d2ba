// SPDX-License-Identifier: Apache-2.0
//
// odn: generate operator datasets, train and evaluate ensemble DeepONets.
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "odn/commands.hpp"

namespace {

std::vector<std::size_t> parse_columns(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty() || text == "all") return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    try {
      const auto v = std::stoull(item, &used);
      if (used != item.size() || item.front() == '-') throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw odn::ConfigError("bad column index '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble DeepONets with POD and partition-of-unity trunks"};
  app.set_version_flag("--version", std::string(odn::kVersion));
  app.require_subcommand(1);

  odn::GenOptions gen;
  std::optional<std::size_t> gen_n_train, gen_n_test;
  std::optional<std::uint64_t> gen_seed;
  auto* g = app.add_subcommand("gen", "Generate a dataset (ODN1) from a config");
  g->add_option("config", gen.config, "Run config")->required();
  g->add_option("out", gen.out, "Output dataset path")->required();
  g->add_flag("--force", gen.force, "Overwrite an existing file");
  g->add_option("--n-train", gen_n_train, "Override data.n_train");
  g->add_option("--n-test", gen_n_test, "Override data.n_test");
  g->add_option("--seed", gen_seed, "Override data.seed");

  odn::TrainOptions tr;
  std::string seeds;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  auto* t = app.add_subcommand("train", "Train one model per seed");
  t->add_option("config", tr.config, "Run config")->required();
  t->add_option("dataset", tr.dataset, "ODN1 dataset")->required();
  t->add_option("out", tr.out, "Output checkpoint path")->required();
  t->add_option("--seeds", seeds, "Comma-separated seeds (overrides the config)");
  t->add_option("--epochs", epochs, "Override train.epochs");
  t->add_option("--lr", lr, "Override train.lr");
  t->add_option("--jobs", tr.jobs, "Seeds trained in parallel processes")->default_val(1);
  t->add_flag("--quiet", tr.quiet, "No progress output");

  odn::EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  e->add_option("checkpoint", ev.checkpoint, "ODM1 checkpoint")->required();
  e->add_option("dataset", ev.dataset, "ODN1 dataset")->required();
  e->add_option("--split", ev.split, "test, train or all (default: from the config)");
  e->add_option("--csv", ev.csv, "Per-function relative l2 CSV");
  e->add_option("--spatial-csv", ev.spatial_csv, "Per-location MSE CSV");

  odn::ExportBasisOptions ex;
  std::string columns;
  auto* x = app.add_subcommand("export-basis", "Sample trunk basis columns at dataset locations");
  x->add_option("checkpoint", ex.checkpoint, "ODM1 checkpoint")->required();
  x->add_option("dataset", ex.dataset, "ODN1 dataset")->required();
  x->add_option("--columns", columns, "Comma-separated column indices (default: all)");
  x->add_option("--out", ex.out, "Output CSV (default: stdout)");

  std::filesystem::path inspect_path;
  auto* in = app.add_subcommand("inspect", "Print the header of an ODN1 or ODM1 file");
  in->add_option("file", inspect_path, "File to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : odn::kExitConfig;
  }

  try {
    odn::apply_environment();
    if (*g) {
      gen.n_train = gen_n_train;
      gen.n_test = gen_n_test;
      gen.seed = gen_seed;
      odn::cmd_gen(gen, std::cerr);
    } else if (*t) {
      if (!seeds.empty()) tr.seeds = odn::parse_seed_list(seeds);
      tr.epochs = epochs;
      tr.lr = lr;
      for (const auto& p : odn::cmd_train(tr, std::cerr)) std::cout << p.string() << "\n";
    } else if (*e) {
      odn::cmd_eval(ev, std::cout);
    } else if (*x) {
      ex.columns = parse_columns(columns);
      odn::cmd_export_basis(ex, std::cout);
    } else if (*in) {
      odn::cmd_inspect(inspect_path, std::cout);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return odn::exit_code(err);
  }
  return odn::kExitOk;
}
