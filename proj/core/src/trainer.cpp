#include "nudg/trainer.hpp"

#include <cmath>
#include <sstream>

#include "nudg/csv.hpp"
#include "nudg/error.hpp"

namespace nudg {

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

void record_feature_stats(const Model& model, const SampleBatch& batch, TrajectoryPoint& point) {
  Matrix features = forward(model, batch).features;
  try {
    const SvdResult s = svd(features);
    double nuc = 0.0;
    double fro = 0.0;
    for (double v : s.sigma) {
      nuc += v;
      fro += v * v;
    }
    point.nuclear_norm = nuc;
    if (s.sigma.front() > 0.0) point.stable_rank = fro / (s.sigma.front() * s.sigma.front());
  } catch (const NumericalError&) {
    // Left empty; a failed decomposition should not abort training.
  }
}

void check_divergence(double risk, const TrainConfig& config, std::size_t step) {
  if (!std::isfinite(risk) || risk > config.divergence_risk) {
    throw NumericalError("training diverged at step " + std::to_string(step) + " (risk " + csv::number(risk) +
                         "); lower the learning rate");
  }
}

}  // namespace

TrainConfig TrainConfig::theory_defaults() {
  TrainConfig c;
  c.learning_rate = 0.5;
  c.backtracking = true;
  return c;
}

TrainConfig TrainConfig::synthetic2d_defaults() {
  TrainConfig c;
  c.learning_rate = 0.1;
  c.backtracking = false;
  c.stats_stride = 100;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be > 0");
  if (max_steps < 1) throw ValidationError("max_steps must be >= 1");
  if (!(grad_tol > 0.0)) throw ValidationError("grad_tol must be > 0");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) throw ValidationError("backtrack_factor must be in (0,1)");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) {
    throw ValidationError("sufficient_decrease must be in (0,1)");
  }
  if (chunks < 1) throw ValidationError("chunks must be >= 1");
}

TrainResult train(const Model& init, const SampleBatch& batch, const Objective& objective, const TrainConfig& config) {
  config.validate();
  Model model = init;
  bool restricted = false;
  if (auto* t = std::get_if<TheoryModel>(&model); t && t->support) {
    restricted = true;
    std::vector<double> w(t->w.size(), 0.0);
    for (std::size_t j : *t->support) w[j] = t->w[j];
    t->w = std::move(w);
  }
  // Validates once (and warns once) before the loop.
  (void)risk(model, batch, objective, EvalOptions{config.chunks, restricted});

  const EvalOptions options{config.chunks, restricted};
  TrainResult result{model, 0, 0.0, 0.0, false, false, {}};
  std::vector<double> params = parameters(model);
  std::vector<double> trial(params.size());

  for (std::size_t step = 0;; ++step) {
    RiskGradient eval = detail::evaluate_unchecked(model, batch, objective, options, true);
    check_divergence(eval.risk, config, step);
    const std::vector<double> grad = parameters(eval.gradient);
    const double gnorm = inf_norm(grad);

    TrajectoryPoint point{step, eval.risk, gnorm, std::nullopt, std::nullopt};
    const bool done = gnorm < config.grad_tol || step == config.max_steps;
    if (config.stats_stride > 0 && (step % config.stats_stride == 0 || done)) {
      record_feature_stats(model, batch, point);
    }
    result.trajectory.push_back(point);
    result.steps = step;
    result.final_risk = eval.risk;
    result.final_grad_norm = gnorm;
    if (gnorm < config.grad_tol) {
      result.converged = true;
      break;
    }
    if (step == config.max_steps) break;

    double lr = config.learning_rate;
    if (config.backtracking) {
      const double g2 = squared_norm(grad);
      const double floor = config.learning_rate * 1e-16;
      bool accepted = false;
      while (lr >= floor) {
        for (std::size_t i = 0; i < params.size(); ++i) trial[i] = params[i] - lr * grad[i];
        Model candidate = model;
        set_parameters(candidate, trial);
        const double r = detail::evaluate_unchecked(candidate, batch, objective, options, false).risk;
        if (std::isfinite(r) && r <= eval.risk - config.sufficient_decrease * lr * g2) {
          accepted = true;
          break;
        }
        lr *= config.backtrack_factor;
      }
      if (!accepted) {
        result.stalled = true;
        break;
      }
      params = trial;
    } else {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
    }
    set_parameters(model, params);
  }
  result.model = std::move(model);
  return result;
}

std::string trajectory_csv(const TrainResult& result) {
  std::ostringstream out;
  out << "step,risk,grad_norm,nuclear_norm,stable_rank\n";
  for (const auto& p : result.trajectory) {
    out << p.step << ',' << csv::number(p.risk) << ',' << csv::number(p.grad_norm) << ','
        << csv::number(p.nuclear_norm) << ',' << csv::number(p.stable_rank) << '\n';
  }
  return out.str();
}

}  // namespace nudg
