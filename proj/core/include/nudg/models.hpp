#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nudg/linalg.hpp"
#include "nudg/sampler.hpp"

namespace nudg {

/// Phi(x) = A x followed by a linear head: output = head . (A x).
struct LinearModel {
  Matrix feature_map;         // d_out x d_in
  std::vector<double> head;   // d_out
};

/// f_w(x) = sum_j w_j x_j with the head fixed to ones. Under a rank
/// constraint `support` lists the coordinates allowed to be nonzero.
struct TheoryModel {
  std::vector<double> w;
  std::optional<std::vector<std::size_t>> support;
};

using Model = std::variant<LinearModel, TheoryModel>;

enum class ObjectiveKind { kErm, kErmNu, kErmL2, kErmRank };

struct Objective {
  ObjectiveKind kind = ObjectiveKind::kErm;
  double lambda = 0.0;
  std::size_t b_rank = 0;

  static Objective erm() { return {}; }
  static Objective nuclear(double lambda) { return {ObjectiveKind::kErmNu, lambda, 0}; }
  static Objective weight_decay(double lambda) { return {ObjectiveKind::kErmL2, lambda, 0}; }
  static Objective rank(std::size_t b_rank) { return {ObjectiveKind::kErmRank, 0.0, b_rank}; }

  std::string name() const;
};

struct EvalOptions {
  /// Rows are reduced in this many contiguous chunks (run on separate
  /// threads); results depend on the chunk count only, never on timing.
  std::size_t chunks = 1;
  /// Theory models with a support: skip off-support coordinates entirely.
  /// Off-support gradient entries are then reported as 0.
  bool support_only = false;
};

struct ForwardResult {
  Matrix features;               // n x d_out (theory: x_j * w_j)
  std::vector<double> margins;   // y * output
};

std::size_t input_dim(const Model& model);
std::size_t parameter_count(const Model& model);

/// Parameters flattened as (A row-major, head) or w.
std::vector<double> parameters(const Model& model);
void set_parameters(Model& model, std::span<const double> values);

/// Throws ValidationError when the objective cannot be applied to the model
/// or to a batch of this width.
void check_compatible(const Model& model, const Objective& objective, std::size_t input_width);

ForwardResult forward(const Model& model, const SampleBatch& batch);

/// Mean logistic loss plus the objective's penalty.
double risk(const Model& model, const SampleBatch& batch, const Objective& objective,
            const EvalOptions& options = {});

/// Gradient of `risk` with the same shape as the model. ERM_RANK returns the
/// plain risk gradient; the trainer enforces the support.
Model gradient(const Model& model, const SampleBatch& batch, const Objective& objective,
               const EvalOptions& options = {});

struct RiskGradient {
  double risk = 0.0;
  double penalty = 0.0;
  Model gradient;
};

RiskGradient risk_and_gradient(const Model& model, const SampleBatch& batch, const Objective& objective,
                               const EvalOptions& options = {});

/// Regularizer value alone (lambda * ||Phi(X)||_* or lambda/2 ||w||^2).
double penalty(const Model& model, const SampleBatch& batch, const Objective& objective);

/// Model output for one input row.
double output(const Model& model, std::span<const double> x);

/// sign(output) with ties resolved to +1.
inline int predict_label(double model_output) noexcept { return model_output >= 0.0 ? 1 : -1; }

double accuracy(const Model& model, const SampleBatch& batch);

namespace detail {
/// risk_and_gradient without the compatibility checks; for inner loops that
/// validated once up front.
RiskGradient evaluate_unchecked(const Model& model, const SampleBatch& batch, const Objective& objective,
                                const EvalOptions& options, bool want_grad);
}  // namespace detail

/// A and head i.i.d. uniform on [-scale, scale].
LinearModel random_linear_model(std::size_t d_out, std::size_t d_in, std::uint64_t seed, double scale = 0.1);

}  // namespace nudg
