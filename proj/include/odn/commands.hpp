// SPDX-License-Identifier: Apache-2.0
//
// Implementations behind the `odn` subcommands. Each function throws an
// odn::Error on failure; exit_code() maps errors onto process exit codes.
#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "odn/config.hpp"
#include "odn/error.hpp"
#include "odn/evaluation.hpp"

namespace odn {

inline constexpr char kVersion[] = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

/// A child job failed; carries the exit code it reported.
class JobError : public Error {
 public:
  JobError(const std::string& what, int code) : Error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

int exit_code(const std::exception& e);

/// Reads ODN_DETERMINISTIC from the environment.
void apply_environment();

struct GenOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  bool force = false;
  std::optional<std::size_t> n_train;
  std::optional<std::size_t> n_test;
  std::optional<std::uint64_t> seed;
};

/// Returns the CRC32 of the written file.
std::uint32_t cmd_gen(const GenOptions& opt, std::ostream& log);

struct TrainOptions {
  std::filesystem::path config;
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::size_t jobs = 1;
  bool quiet = false;
};

/// Checkpoint path for one seed: `out` itself for a single seed, otherwise
/// `<stem>.seed<k><ext>`.
std::filesystem::path seed_output_path(const std::filesystem::path& out, std::uint64_t seed,
                                       bool multi);

/// Trains one model per seed. Writes the checkpoint, `<ckpt>.loss.csv` and
/// `<ckpt>.manifest.txt`. Returns the checkpoint paths.
std::vector<std::filesystem::path> cmd_train(const TrainOptions& opt, std::ostream& log);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path dataset;
  std::string split;  // empty = from the stored config
  std::filesystem::path csv;
  std::filesystem::path spatial_csv;
};

EvalReport cmd_eval(const EvalOptions& opt, std::ostream& out);

struct ExportBasisOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path dataset;
  std::vector<std::size_t> columns;  // empty = all
  std::filesystem::path out;         // empty = the stream
};

void cmd_export_basis(const ExportBasisOptions& opt, std::ostream& out);

/// Prints the header and metadata of an ODN1 dataset or ODM1 checkpoint.
void cmd_inspect(const std::filesystem::path& path, std::ostream& out);

}  // namespace odn
