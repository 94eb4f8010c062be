#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nudg::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 1,
  kNumericalFailure = 2,
  kCheckFailure = 3,
};

/// Every parameter of every subcommand after defaults, config file and flags
/// have been merged. Fields a subcommand does not use keep their defaults and
/// are left out of its resolved-config file.
struct RunConfig {
  std::string command;
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool allow_out_of_regime = false;

  // synth2d / sweep
  double flip_prob = 0.7;
  double lambda = 0.01;
  std::vector<double> lambdas;
  std::size_t n_train = 200;
  std::size_t n_eval = 100'000;
  std::size_t hidden = 2;
  std::size_t resolution = 200;
  double learning_rate = 0.1;
  std::size_t max_steps = 50'000;
  double grad_tol = 1e-7;
  bool backtracking = false;

  // theory
  std::size_t r = 49;
  std::size_t d = 300;
  double gamma = 0.45;
  std::size_t b_rank = 10;
  std::size_t n_reduced = 1'000'000;
  std::size_t rank_steps = 200;

  // verify
  std::string suite = "all";

  /// Flat TOML, keys named after the flags; feeding it back through
  /// --config reproduces the run.
  std::string resolved_toml() const;
};

/// Parses argv (defaults < --config file < flags). Throws CLI::ParseError
/// subclasses for usage errors, ValidationError for bad values.
RunConfig parse(int argc, const char* const* argv);

int cmd_synth2d(const RunConfig& config, std::ostream& log);
int cmd_theory(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);

/// Full front end: parse, dispatch, map exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nudg::cli
