#include "nudg/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "nudg/error.hpp"
#include "nudg/log.hpp"
#include "nudg/losses.hpp"
#include "nudg/parallel.hpp"
#include "nudg/rng.hpp"

namespace nudg {

namespace {

struct LossAccumulator {
  double loss = 0.0;
  std::vector<double> grad;  // theory: d entries; linear: sum_i s_i x_i
};

Matrix feature_matrix(const Model& model, const Matrix& x) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    const Matrix& a = lin->feature_map;
    Matrix f(x.rows(), a.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto xi = x.row(i);
      auto fi = f.row(i);
      for (std::size_t k = 0; k < a.rows(); ++k) {
        auto ak = a.row(k);
        double s = 0.0;
        for (std::size_t j = 0; j < ak.size(); ++j) s += ak[j] * xi[j];
        fi[k] = s;
      }
    }
    return f;
  }
  const auto& w = std::get<TheoryModel>(model).w;
  Matrix f(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    auto fi = f.row(i);
    for (std::size_t j = 0; j < xi.size(); ++j) fi[j] = w[j] * xi[j];
  }
  return f;
}

double theory_output(const TheoryModel& m, std::span<const double> x, bool support_only) {
  double s = 0.0;
  if (support_only && m.support) {
    for (std::size_t j : *m.support) s += m.w[j] * x[j];
  } else {
    for (std::size_t j = 0; j < x.size(); ++j) s += m.w[j] * x[j];
  }
  return s;
}

double linear_output(const LinearModel& m, std::span<const double> x) {
  const Matrix& a = m.feature_map;
  double out = 0.0;
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ak = a.row(k);
    double f = 0.0;
    for (std::size_t j = 0; j < ak.size(); ++j) f += ak[j] * x[j];
    out += m.head[k] * f;
  }
  return out;
}

LossAccumulator loss_terms(const Model& model, const SampleBatch& batch, const EvalOptions& options,
                           bool want_grad) {
  const Matrix& x = batch.inputs;
  const std::size_t width = x.cols();
  const auto* theory = std::get_if<TheoryModel>(&model);
  const auto* linear = std::get_if<LinearModel>(&model);
  const bool sparse = theory && options.support_only && theory->support;

  auto work = [&](std::size_t lo, std::size_t hi, LossAccumulator& acc) {
    if (want_grad) acc.grad.assign(width, 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      auto xi = x.row(i);
      const double y = batch.labels[i];
      const double out = theory ? theory_output(*theory, xi, options.support_only) : linear_output(*linear, xi);
      const double m = y * out;
      acc.loss += logistic(m);
      if (!want_grad) continue;
      const double s = logistic_prime(m) * y;
      if (sparse) {
        for (std::size_t j : *theory->support) acc.grad[j] += s * xi[j];
      } else {
        for (std::size_t j = 0; j < width; ++j) acc.grad[j] += s * xi[j];
      }
    }
  };

  auto parts = parallel::chunked<LossAccumulator>(x.rows(), options.chunks, work);
  LossAccumulator total = std::move(parts.front());
  for (std::size_t c = 1; c < parts.size(); ++c) {
    total.loss += parts[c].loss;
    if (want_grad) {
      for (std::size_t j = 0; j < width; ++j) total.grad[j] += parts[c].grad[j];
    }
  }
  return total;
}

void check_lambda(const Objective& o) {
  if (!(o.lambda >= 0.0) || !std::isfinite(o.lambda)) {
    throw ValidationError("objective " + o.name() + ": lambda must be finite and >= 0");
  }
}

RiskGradient evaluate(const Model& model, const SampleBatch& batch, const Objective& objective,
                      const EvalOptions& options, bool want_grad) {
  const double n = static_cast<double>(batch.size());
  LossAccumulator acc = loss_terms(model, batch, options, want_grad);

  RiskGradient out{acc.loss / n, 0.0, model};
  if (want_grad) {
    if (auto* lin = std::get_if<LinearModel>(&out.gradient)) {
      const auto& src = std::get<LinearModel>(model);
      const Matrix& a = src.feature_map;
      for (std::size_t k = 0; k < a.rows(); ++k) {
        for (std::size_t j = 0; j < a.cols(); ++j) lin->feature_map(k, j) = src.head[k] * acc.grad[j] / n;
        double gh = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) gh += a(k, j) * acc.grad[j];
        lin->head[k] = gh / n;
      }
    } else {
      auto& g = std::get<TheoryModel>(out.gradient);
      for (std::size_t j = 0; j < g.w.size(); ++j) g.w[j] = acc.grad[j] / n;
    }
  }

  switch (objective.kind) {
    case ObjectiveKind::kErm:
    case ObjectiveKind::kErmRank:
      break;
    case ObjectiveKind::kErmL2: {
      const auto& w = std::get<TheoryModel>(model).w;
      if (objective.lambda == 0.0) break;
      double sq = 0.0;
      for (double v : w) sq += v * v;
      out.penalty = 0.5 * objective.lambda * sq;
      if (want_grad) {
        auto& g = std::get<TheoryModel>(out.gradient).w;
        for (std::size_t j = 0; j < w.size(); ++j) g[j] += objective.lambda * w[j];
      }
      break;
    }
    case ObjectiveKind::kErmNu: {
      if (objective.lambda == 0.0) break;
      const Matrix features = feature_matrix(model, batch.inputs);
      const SvdResult s = svd(features);
      double nuc = 0.0;
      for (double v : s.sigma) nuc += v;
      out.penalty = objective.lambda * nuc;
      if (want_grad) {
        const Matrix g = nuclear_norm_subgradient(s);
        if (auto* lin = std::get_if<LinearModel>(&out.gradient)) {
          const Matrix ga = transpose_times(g, batch.inputs);
          auto dst = lin->feature_map.entries();
          auto src = ga.entries();
          for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += objective.lambda * src[e];
        } else {
          auto& gw = std::get<TheoryModel>(out.gradient).w;
          for (std::size_t i = 0; i < batch.size(); ++i) {
            auto gi = g.row(i);
            auto xi = batch.inputs.row(i);
            for (std::size_t j = 0; j < gw.size(); ++j) gw[j] += objective.lambda * gi[j] * xi[j];
          }
        }
      }
      break;
    }
  }
  if (want_grad && options.support_only) {
    if (auto* g = std::get_if<TheoryModel>(&out.gradient); g && g->support) {
      std::vector<double> masked(g->w.size(), 0.0);
      for (std::size_t j : *g->support) masked[j] = g->w[j];
      g->w = std::move(masked);
    }
  }
  out.risk += out.penalty;
  return out;
}

}  // namespace

std::string Objective::name() const {
  switch (kind) {
    case ObjectiveKind::kErm: return "ERM";
    case ObjectiveKind::kErmNu: return "ERM-NU";
    case ObjectiveKind::kErmL2: return "ERM-L2";
    case ObjectiveKind::kErmRank: return "ERM-RANK";
  }
  return "?";
}

std::size_t input_dim(const Model& model) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) return lin->feature_map.cols();
  return std::get<TheoryModel>(model).w.size();
}

std::size_t parameter_count(const Model& model) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) return lin->feature_map.size() + lin->head.size();
  return std::get<TheoryModel>(model).w.size();
}

std::vector<double> parameters(const Model& model) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    std::vector<double> p(lin->feature_map.entries().begin(), lin->feature_map.entries().end());
    p.insert(p.end(), lin->head.begin(), lin->head.end());
    return p;
  }
  return std::get<TheoryModel>(model).w;
}

void set_parameters(Model& model, std::span<const double> values) {
  if (values.size() != parameter_count(model)) throw ValidationError("set_parameters: size mismatch");
  if (auto* lin = std::get_if<LinearModel>(&model)) {
    auto a = lin->feature_map.entries();
    std::copy(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(a.size()), a.begin());
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(a.size()), values.end(), lin->head.begin());
    return;
  }
  auto& w = std::get<TheoryModel>(model).w;
  std::copy(values.begin(), values.end(), w.begin());
}

void check_compatible(const Model& model, const Objective& objective, std::size_t input_width) {
  if (input_dim(model) != input_width) {
    throw ValidationError("model expects inputs of width " + std::to_string(input_dim(model)) + ", batch has " +
                          std::to_string(input_width));
  }
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    if (lin->head.size() != lin->feature_map.rows()) {
      throw ValidationError("linear model: head length must equal the feature dimension");
    }
    if (!lin->feature_map.all_finite()) throw ValidationError("linear model: non-finite feature map");
    if (objective.kind == ObjectiveKind::kErmL2 || objective.kind == ObjectiveKind::kErmRank) {
      throw ValidationError(objective.name() + " requires the theory model");
    }
  } else {
    const auto& t = std::get<TheoryModel>(model);
    if (t.support) {
      for (std::size_t j : *t.support) {
        if (j >= t.w.size()) throw ValidationError("theory model: support index out of range");
      }
    }
    if (objective.kind == ObjectiveKind::kErmRank) {
      if (objective.b_rank < 1 || objective.b_rank > t.w.size()) {
        throw ValidationError("ERM-RANK: need 1 <= b_rank <= d");
      }
      if (t.support && t.support->size() > objective.b_rank) {
        throw ValidationError("ERM-RANK: support larger than b_rank");
      }
    }
  }
  if (objective.kind == ObjectiveKind::kErmNu || objective.kind == ObjectiveKind::kErmL2) check_lambda(objective);
}

ForwardResult forward(const Model& model, const SampleBatch& batch) {
  check_compatible(model, Objective::erm(), batch.inputs.cols());
  ForwardResult out{feature_matrix(model, batch.inputs), std::vector<double>(batch.size())};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.margins[i] = batch.labels[i] * output(model, batch.inputs.row(i));
  }
  return out;
}

namespace {

void check_all(const Model& model, const SampleBatch& batch, const Objective& objective) {
  check_compatible(model, objective, batch.inputs.cols());
  if (objective.kind == ObjectiveKind::kErmNu) {
    const std::size_t feature_dim =
        std::holds_alternative<LinearModel>(model) ? std::get<LinearModel>(model).feature_map.rows() : input_dim(model);
    if (batch.size() <= feature_dim) {
      warn("ERM-NU: batch size " + std::to_string(batch.size()) + " does not exceed the feature dimension " +
           std::to_string(feature_dim) + "; the nuclear norm no longer tracks feature rank");
    }
  }
}

}  // namespace

double risk(const Model& model, const SampleBatch& batch, const Objective& objective, const EvalOptions& options) {
  check_all(model, batch, objective);
  return evaluate(model, batch, objective, options, false).risk;
}

Model gradient(const Model& model, const SampleBatch& batch, const Objective& objective,
               const EvalOptions& options) {
  check_all(model, batch, objective);
  return evaluate(model, batch, objective, options, true).gradient;
}

RiskGradient risk_and_gradient(const Model& model, const SampleBatch& batch, const Objective& objective,
                               const EvalOptions& options) {
  check_all(model, batch, objective);
  return evaluate(model, batch, objective, options, true);
}

namespace detail {

RiskGradient evaluate_unchecked(const Model& model, const SampleBatch& batch, const Objective& objective,
                                const EvalOptions& options, bool want_grad) {
  return evaluate(model, batch, objective, options, want_grad);
}

}  // namespace detail

double penalty(const Model& model, const SampleBatch& batch, const Objective& objective) {
  check_compatible(model, objective, batch.inputs.cols());
  switch (objective.kind) {
    case ObjectiveKind::kErmNu:
      return objective.lambda == 0.0 ? 0.0 : objective.lambda * nuclear_norm(feature_matrix(model, batch.inputs));
    case ObjectiveKind::kErmL2: {
      double sq = 0.0;
      for (double v : std::get<TheoryModel>(model).w) sq += v * v;
      return 0.5 * objective.lambda * sq;
    }
    default:
      return 0.0;
  }
}

double output(const Model& model, std::span<const double> x) {
  if (x.size() != input_dim(model)) throw ValidationError("output: input width mismatch");
  if (const auto* lin = std::get_if<LinearModel>(&model)) return linear_output(*lin, x);
  return theory_output(std::get<TheoryModel>(model), x, false);
}

double accuracy(const Model& model, const SampleBatch& batch) {
  check_compatible(model, Objective::erm(), batch.inputs.cols());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (predict_label(output(model, batch.inputs.row(i))) == batch.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

LinearModel random_linear_model(std::size_t d_out, std::size_t d_in, std::uint64_t seed, double scale) {
  rng::SplitMix64 g(rng::derive_seed(seed, "init/linear"));
  LinearModel m{Matrix(d_out, d_in), std::vector<double>(d_out)};
  for (double& a : m.feature_map.entries()) a = scale * (2.0 * g.uniform() - 1.0);
  for (double& h : m.head) h = scale * (2.0 * g.uniform() - 1.0);
  return m;
}

}  // namespace nudg
