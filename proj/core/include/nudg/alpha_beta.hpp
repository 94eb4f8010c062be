#pragma once

#include <cstddef>
#include <vector>

#include "nudg/sampler.hpp"
#include "nudg/trainer.hpp"

namespace nudg {

/// Per-sample group sums of the label-recovered latents: s_r = sum over R,
/// s_u = sum over U. Under w = (alpha on R, beta on U) the margin is
/// alpha * s_r + beta * s_u.
struct GroupSums {
  std::size_t r = 0;
  std::size_t d = 0;
  std::vector<double> s_r;
  std::vector<double> s_u;
  std::size_t size() const noexcept { return s_r.size(); }
};

/// Streams spec.n samples; never materializes the n x d batch.
GroupSums group_sums(const TheorySpec& spec);
/// From an existing batch whose first r columns are the invariant coordinates.
GroupSums group_sums(const SampleBatch& batch, std::size_t r);

struct AlphaBetaResult {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  std::size_t n = 0;
  // Sandwich standard errors of the sample-average solution.
  double se_alpha = 0.0;
  double se_beta = 0.0;
  double se_difference = 0.0;  // alpha - beta
  double se_ratio = 0.0;       // alpha / beta, delta method
};

/// Minimizes mean l(alpha s_r + beta s_u) + lambda/2 (r alpha^2 + (d-r) beta^2)
/// by damped Newton on a fixed sample. Uses config.max_steps and
/// config.grad_tol; throws NumericalError when it does not converge.
AlphaBetaResult solve_alpha_beta(const GroupSums& sums, double lambda, const TrainConfig& config);
AlphaBetaResult solve_alpha_beta(const TheorySpec& spec, double lambda, const TrainConfig& config);

}  // namespace nudg
