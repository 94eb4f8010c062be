#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nudg/models.hpp"
#include "nudg/sampler.hpp"
#include "nudg/trainer.hpp"

namespace nudg {

struct Synthetic2dConfig {
  double flip_prob = 0.7;
  double lambda = 0.01;
  std::size_t n_train = 200;
  std::size_t n_eval = 100'000;
  std::size_t hidden = 2;  // rows of A
  std::uint64_t seed = 0;
  std::size_t resolution = 200;
  TrainConfig train = TrainConfig::synthetic2d_defaults();

  void validate() const;
};

/// Train batch plus fresh held-out batches for both domains. Seeds derive
/// from config.seed by purpose ("synth2d/train", "synth2d/eval-id", ...).
struct Synthetic2dData {
  SampleBatch train;
  SampleBatch eval_id;
  SampleBatch eval_ood;
};

Synthetic2dData make_synthetic2d_data(const Synthetic2dConfig& config);
/// Same initialization ("synth2d/init") for every objective.
LinearModel synthetic2d_init(const Synthetic2dConfig& config);
TrainResult train_synthetic2d(const Synthetic2dData& data, const Synthetic2dConfig& config, const Objective& objective);

/// Predicts sign(x1); exact on both domains by construction.
LinearModel oracle_x1_model();

struct ComparisonRow {
  std::string objective;
  double id_accuracy = 0.0;
  double ood_accuracy = 0.0;
  double id_se = 0.0;
  double ood_se = 0.0;
  std::size_t steps = 0;
  bool converged = false;
};

struct ComparisonResult {
  std::vector<ComparisonRow> rows;  // ERM, ERM-NU, oracle-x1
  Model erm_model;
  Model nu_model;
};

ComparisonResult run_synthetic2d_comparison(const Synthetic2dConfig& config);
/// objective,lambda,id_accuracy,ood_accuracy,id_se,ood_se,steps,converged
std::string comparison_csv(const ComparisonResult& result, double lambda);

struct SweepRecord {
  double lambda = 0.0;
  double id_accuracy = 0.0;
  double ood_accuracy = 0.0;
  double stable_rank = 0.0;   // of the OOD evaluation features
  double nuclear_norm = 0.0;
  std::size_t steps = 0;
  bool converged = false;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  Synthetic2dConfig config;
  /// False when a sweep point failed numerically; records hold the points
  /// before it and `failure` the reason.
  bool complete = true;
  std::string failure;
};

/// {0, 1e-3, 10^-2.5, 1e-2, 10^-1.5, 1e-1}
std::vector<double> default_lambda_grid();
SweepRecord evaluate_sweep_point(const Model& model, double lambda, const Synthetic2dData& data);
/// lambdas must be >= 0 and strictly increasing. Every point starts from the
/// same initialization and uses Objective::nuclear(lambda).
SweepResult run_lambda_sweep(std::span<const double> lambdas, const Synthetic2dConfig& config);
/// lambda,id_accuracy,ood_accuracy,stable_rank,nuclear_norm,steps,converged
std::string sweep_csv(const SweepResult& result);
std::string sweep_row_csv(const SweepRecord& record);
/// Self-contained SVG: lambda on x, stable rank on the left axis, OOD
/// accuracy on the right axis.
std::string sweep_svg(const SweepResult& result);

struct BoundaryGrid {
  std::size_t resolution = 0;
  double lo = -1.0;
  double hi = 1.0;
  /// labels[row * resolution + col]; col indexes x1, row indexes x2, both at
  /// cell centers increasing from lo.
  std::vector<int> labels;

  double center(std::size_t k) const noexcept;
  int at(std::size_t row, std::size_t col) const noexcept { return labels[row * resolution + col]; }
};

/// Throws ValidationError for a model without 2-D inputs or resolution < 50.
BoundaryGrid export_boundary_grid(const Model& model, std::size_t resolution);
/// x1,x2,label
std::string boundary_csv(const BoundaryGrid& grid);
/// Angle in degrees between the decision boundary of a 2-D linear model and
/// the vertical line x1 = 0.
double boundary_angle_from_vertical(const LinearModel& model);

}  // namespace nudg
