#include "nudg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include "nudg/checkpoint.hpp"
#include "nudg/csv.hpp"
#include "nudg/error.hpp"
#include "nudg/experiments.hpp"
#include "nudg/verifier.hpp"

namespace nudg::cli {

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

constexpr const char* kCommands[] = {"synth2d", "theory", "sweep", "verify"};

// Options whose default depends on the subcommand.
struct Deferred {
  std::optional<double> lambda;
  std::optional<std::size_t> n_train;
  std::optional<std::size_t> n_eval;
  std::optional<double> learning_rate;
};

void build(CLI::App& app, RunConfig& c, Deferred& later) {
  app.description("Nuclear-norm regularized ERM: synthetic experiments and numerical verification");
  app.set_config("--config", "", "Flat TOML file; keys are flag names without dashes prefix");
  app.add_option("command", c.command, "synth2d | theory | sweep | verify")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kCommands), std::end(kCommands))));
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--seed", c.seed, "Top-level seed")->capture_default_str();
  app.add_option("--threads", c.threads, "Chunks for deterministic parallel reductions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--allow-out-of-regime", c.allow_out_of_regime, "Permit theory specs outside the proven regime");

  app.add_option("--flip-prob", c.flip_prob, "2-D task: P[sign(x2) = y] on ID")->capture_default_str();
  app.add_option("--lambda", later.lambda, "Regularization weight (synth2d 0.01, theory/verify 0.05)");
  app.add_option("--lambdas", c.lambdas, "Sweep grid, comma separated (default 0,1e-3,10^-2.5,1e-2,10^-1.5,1e-1)")
      ->delimiter(',');
  app.add_option("--n-train", later.n_train, "Training samples (synth2d/sweep 200, theory 5000)");
  app.add_option("--n-eval", later.n_eval, "Evaluation samples per domain (synth2d/sweep 1e5, theory 1e6)");
  app.add_option("--hidden", c.hidden, "Rows of the feature map A")->capture_default_str();
  app.add_option("--resolution", c.resolution, "Boundary grid resolution")->capture_default_str();
  app.add_option("--learning-rate", later.learning_rate, "Gradient step (default 0.1)");
  app.add_option("--max-steps", c.max_steps, "Gradient steps cap")->capture_default_str();
  app.add_option("--grad-tol", c.grad_tol, "Stop when the gradient infinity-norm drops below this")
      ->capture_default_str();
  app.add_option("--backtracking", c.backtracking, "Armijo backtracking (true/false)")->capture_default_str();

  app.add_option("--r", c.r, "Invariant coordinates")->capture_default_str();
  app.add_option("--d", c.d, "Total coordinates")->capture_default_str();
  app.add_option("--gamma", c.gamma, "Environmental bias")->capture_default_str();
  app.add_option("--b-rank", c.b_rank, "Rank budget")->capture_default_str();
  app.add_option("--n-reduced", c.n_reduced, "Samples for the (alpha, beta) solver")->capture_default_str();
  app.add_option("--rank-steps", c.rank_steps, "Gradient steps per support in the rank solver")
      ->capture_default_str();

  const auto suites = suite_names();
  app.add_option("--suite", c.suite, "Verification suite")
      ->check(CLI::IsMember(std::vector<std::string>(suites.begin(), suites.end())))
      ->capture_default_str();
}

void resolve(RunConfig& c, const Deferred& later) {
  const bool theoretical = c.command == "theory" || c.command == "verify";
  c.lambda = later.lambda.value_or(theoretical ? 0.05 : 0.01);
  c.n_train = later.n_train.value_or(c.command == "theory" ? 5'000 : 200);
  c.n_eval = later.n_eval.value_or(c.command == "theory" ? 1'000'000 : 100'000);
  c.learning_rate = later.learning_rate.value_or(0.1);
  if (c.lambdas.empty()) c.lambdas = default_lambda_grid();
}

template <class T>
std::string value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    return shortest(v);
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else {
    std::string quoted = "\"";
    for (char ch : std::string(v)) {
      if (ch == '"' || ch == '\\') quoted += '\\';
      quoted += ch;
    }
    return quoted + "\"";
  }
}

Synthetic2dConfig synthetic_config(const RunConfig& c) {
  Synthetic2dConfig s;
  s.flip_prob = c.flip_prob;
  s.lambda = c.lambda;
  s.n_train = c.n_train;
  s.n_eval = c.n_eval;
  s.hidden = c.hidden;
  s.seed = c.seed;
  s.resolution = c.resolution;
  s.train.learning_rate = c.learning_rate;
  s.train.max_steps = c.max_steps;
  s.train.grad_tol = c.grad_tol;
  s.train.backtracking = c.backtracking;
  s.train.chunks = c.threads;
  s.validate();
  return s;
}

void write(const RunConfig& c, const std::string& name, std::string_view content, std::ostream& log) {
  csv::write_file(c.out / name, content);
  log << "wrote " << (c.out / name).string() << '\n';
}

void write_common(const RunConfig& c, const std::string& report, std::ostream& log) {
  write(c, "resolved-config.toml", c.resolved_toml(), log);
  write(c, "report.txt", report, log);
}

}  // namespace

std::string RunConfig::resolved_toml() const {
  std::ostringstream s;
  auto kv = [&](const char* key, const auto& v) { s << key << " = " << value(v) << '\n'; };
  kv("command", command);
  kv("out", out.generic_string());
  kv("seed", seed);
  kv("threads", threads);
  kv("allow-out-of-regime", allow_out_of_regime);
  if (command == "synth2d" || command == "sweep") {
    kv("flip-prob", flip_prob);
    if (command == "synth2d") {
      kv("lambda", lambda);
      kv("resolution", resolution);
    } else {
      s << "lambdas = [";
      for (std::size_t k = 0; k < lambdas.size(); ++k) s << (k ? ", " : "") << shortest(lambdas[k]);
      s << "]\n";
    }
    kv("n-train", n_train);
    kv("n-eval", n_eval);
    kv("hidden", hidden);
    kv("learning-rate", learning_rate);
    kv("max-steps", max_steps);
    kv("grad-tol", grad_tol);
    kv("backtracking", backtracking);
  } else if (command == "theory") {
    kv("r", r);
    kv("d", d);
    kv("gamma", gamma);
    kv("lambda", lambda);
    kv("b-rank", b_rank);
    kv("n-train", n_train);
    kv("n-eval", n_eval);
    kv("n-reduced", n_reduced);
    kv("rank-steps", rank_steps);
  } else if (command == "verify") {
    kv("suite", suite);
    kv("lambda", lambda);
    kv("b-rank", b_rank);
  }
  return s.str();
}

RunConfig parse(int argc, const char* const* argv) {
  CLI::App app{"nudg"};
  RunConfig c;
  Deferred later;
  build(app, c, later);
  app.parse(argc, argv);
  resolve(c, later);
  return c;
}

int cmd_synth2d(const RunConfig& c, std::ostream& log) {
  const Synthetic2dConfig config = synthetic_config(c);
  const Synthetic2dData data = make_synthetic2d_data(config);
  std::ostringstream report;
  report << "2-D synthetic comparison (flip_prob " << shortest(config.flip_prob) << ", seed " << config.seed
         << ")\n";

  std::vector<ComparisonRow> rows;
  for (const Objective& objective : {Objective::erm(), Objective::nuclear(config.lambda)}) {
    const TrainResult run = train_synthetic2d(data, config, objective);
    const std::string tag = objective.kind == ObjectiveKind::kErm ? "erm" : "erm-nu";
    write(c, "trajectory-" + tag + ".csv", trajectory_csv(run), log);
    write(c, "boundary-" + tag + ".csv", boundary_csv(export_boundary_grid(run.model, config.resolution)), log);
    write(c, "model-" + tag + ".json", checkpoint_json(run.model), log);
    ComparisonRow row;
    row.objective = objective.name();
    row.id_accuracy = accuracy(run.model, data.eval_id);
    row.ood_accuracy = accuracy(run.model, data.eval_ood);
    row.id_se = std::sqrt(row.id_accuracy * (1 - row.id_accuracy) / static_cast<double>(config.n_eval));
    row.ood_se = std::sqrt(row.ood_accuracy * (1 - row.ood_accuracy) / static_cast<double>(config.n_eval));
    row.steps = run.steps;
    row.converged = run.converged;
    rows.push_back(row);
    report << "  " << row.objective << ": id " << shortest(row.id_accuracy) << ", ood "
           << shortest(row.ood_accuracy) << ", boundary "
           << shortest(boundary_angle_from_vertical(std::get<LinearModel>(run.model))) << " deg from vertical, "
           << run.steps << " steps\n";
  }
  const LinearModel oracle = oracle_x1_model();
  ComparisonRow o{"oracle-x1", accuracy(oracle, data.eval_id), accuracy(oracle, data.eval_ood), 0.0, 0.0, 0, true};
  rows.push_back(o);
  report << "  oracle-x1: id " << shortest(o.id_accuracy) << ", ood " << shortest(o.ood_accuracy) << '\n';

  ComparisonResult table{rows, oracle, oracle};
  write(c, "comparison.csv", comparison_csv(table, config.lambda), log);
  write_common(c, report.str(), log);
  return kSuccess;
}

int cmd_sweep(const RunConfig& c, std::ostream& log) {
  const Synthetic2dConfig config = synthetic_config(c);
  const SweepResult result = run_lambda_sweep(c.lambdas, config);
  write(c, "sweep.csv", sweep_csv(result), log);
  write(c, "plot.svg", sweep_svg(result), log);
  std::ostringstream report;
  report << "lambda sweep on the 2-D task (seed " << config.seed << ")\n";
  for (const auto& r : result.records) {
    report << "  lambda " << shortest(r.lambda) << ": ood " << shortest(r.ood_accuracy) << ", stable rank "
           << shortest(r.stable_rank) << '\n';
  }
  if (!result.complete) report << "incomplete: " << result.failure << '\n';
  write_common(c, report.str(), log);
  if (!result.complete) throw NumericalError(result.failure);
  return kSuccess;
}

int cmd_theory(const RunConfig& c, std::ostream& log) {
  TheorySpec spec;
  spec.r = c.r;
  spec.d = c.d;
  spec.gamma = c.gamma;
  spec.seed = c.seed;
  spec.n = c.n_train;
  spec.allow_out_of_regime = c.allow_out_of_regime;
  spec.validate();
  Proposition1Options options;
  options.n_train = c.n_train;
  options.n_eval = c.n_eval;
  options.n_reduced = c.n_reduced;
  options.rank_steps = c.rank_steps;
  options.chunks = c.threads;
  VerificationReport report = verify_proposition1(spec, c.lambda, c.b_rank, options);
  report.sort_by_name();
  write(c, "report.csv", report.csv(), log);
  write_common(c, report.summary(), log);
  log << report.summary();
  return report.all_passed() ? kSuccess : kCheckFailure;
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
  SuiteOptions options;
  options.seed = c.seed;
  options.chunks = c.threads;
  options.lambda = c.lambda;
  options.b_rank = c.b_rank;
  const VerificationReport report = run_suite(c.suite, options);
  write(c, "report.csv", report.csv(), log);
  write_common(c, report.summary(), log);
  log << report.summary();
  return report.all_passed() ? kSuccess : kCheckFailure;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nudg"};
  RunConfig c;
  Deferred later;
  build(app, c, later);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return kValidationError;
  }
  try {
    resolve(c, later);
    if (c.command == "synth2d") return cmd_synth2d(c, out);
    if (c.command == "sweep") return cmd_sweep(c, out);
    if (c.command == "theory") return cmd_theory(c, out);
    return cmd_verify(c, out);
  } catch (const ValidationError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kValidationError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
}

}  // namespace nudg::cli
