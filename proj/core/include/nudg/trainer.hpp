#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nudg/models.hpp"
#include "nudg/sampler.hpp"

namespace nudg {

struct TrainConfig {
  double learning_rate = 0.5;
  std::size_t max_steps = 50000;
  /// Converged when the gradient infinity-norm drops below this.
  double grad_tol = 1e-7;
  /// Armijo backtracking: shrink by backtrack_factor until
  /// risk(new) <= risk(old) - sufficient_decrease * lr * ||g||^2.
  bool backtracking = false;
  double backtrack_factor = 0.5;
  double sufficient_decrease = 1e-4;
  /// Risk above this (or non-finite) aborts with NumericalError.
  double divergence_risk = 1e6;
  std::size_t chunks = 1;
  /// Record nuclear norm / stable rank of the training features every this
  /// many steps and at the end; 0 disables.
  std::size_t stats_stride = 0;

  /// lr 0.5 with backtracking, for the convex theory objectives.
  static TrainConfig theory_defaults();
  /// lr 0.1, plain (sub)gradient steps, feature stats every 100 steps.
  static TrainConfig synthetic2d_defaults();

  void validate() const;
};

struct TrajectoryPoint {
  std::size_t step = 0;
  double risk = 0.0;
  double grad_norm = 0.0;
  std::optional<double> nuclear_norm;
  std::optional<double> stable_rank;
};

struct TrainResult {
  Model model;
  std::size_t steps = 0;
  double final_risk = 0.0;
  double final_grad_norm = 0.0;
  bool converged = false;
  /// Backtracking could not find a decreasing step (nonsmooth kink).
  bool stalled = false;
  std::vector<TrajectoryPoint> trajectory;
};

/// Full-batch gradient descent on `batch`. A theory model carrying a support
/// is trained on that support only; off-support weights stay exactly zero.
/// Throws NumericalError on divergence.
TrainResult train(const Model& init, const SampleBatch& batch, const Objective& objective, const TrainConfig& config);

/// step,risk,grad_norm,nuclear_norm,stable_rank
std::string trajectory_csv(const TrainResult& result);

}  // namespace nudg
