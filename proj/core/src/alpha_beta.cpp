#include "nudg/alpha_beta.hpp"

#include <array>
#include <cmath>
#include <string>

#include "nudg/csv.hpp"
#include "nudg/error.hpp"
#include "nudg/losses.hpp"
#include "nudg/parallel.hpp"

namespace nudg {

namespace {

struct Moments {
  double loss = 0.0;
  std::array<double, 2> grad{};
  std::array<double, 3> hess{};   // (aa, ab, bb)
  std::array<double, 3> score{};  // second moments of the per-sample loss gradient
};

Moments accumulate(const GroupSums& s, double alpha, double beta, std::size_t chunks, bool second_order) {
  auto parts = parallel::chunked<Moments>(s.size(), chunks, [&](std::size_t lo, std::size_t hi, Moments& m) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double a = s.s_r[i];
      const double b = s.s_u[i];
      const double z = alpha * a + beta * b;
      const double g = logistic_prime(z);
      m.loss += logistic(z);
      m.grad[0] += g * a;
      m.grad[1] += g * b;
      if (second_order) {
        const double h = logistic_second(z);
        m.hess[0] += h * a * a;
        m.hess[1] += h * a * b;
        m.hess[2] += h * b * b;
        m.score[0] += g * g * a * a;
        m.score[1] += g * g * a * b;
        m.score[2] += g * g * b * b;
      }
    }
  });
  Moments total;
  for (const Moments& p : parts) {
    total.loss += p.loss;
    for (int k = 0; k < 2; ++k) total.grad[k] += p.grad[k];
    for (int k = 0; k < 3; ++k) {
      total.hess[k] += p.hess[k];
      total.score[k] += p.score[k];
    }
  }
  const double n = static_cast<double>(s.size());
  total.loss /= n;
  for (double& v : total.grad) v /= n;
  for (double& v : total.hess) v /= n;
  for (double& v : total.score) v /= n;
  return total;
}

}  // namespace

GroupSums group_sums(const TheorySpec& spec) {
  spec.validate();
  if (spec.n == 0) throw ValidationError("group_sums needs n >= 1");
  GroupSums out{spec.r, spec.d, std::vector<double>(spec.n), std::vector<double>(spec.n)};
  std::vector<double> z(spec.d);
  for (std::size_t i = 0; i < spec.n; ++i) {
    draw_theory_sample(spec, i, z);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t j = 0; j < spec.r; ++j) a += z[j];
    for (std::size_t j = spec.r; j < spec.d; ++j) b += z[j];
    out.s_r[i] = a;
    out.s_u[i] = b;
  }
  return out;
}

GroupSums group_sums(const SampleBatch& batch, std::size_t r) {
  const std::size_t d = batch.inputs.cols();
  if (r < 1 || r >= d) throw ValidationError("group_sums needs 1 <= r < d");
  GroupSums out{r, d, std::vector<double>(batch.size()), std::vector<double>(batch.size())};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto x = batch.inputs.row(i);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t j = 0; j < r; ++j) a += x[j];
    for (std::size_t j = r; j < d; ++j) b += x[j];
    out.s_r[i] = a * batch.labels[i];
    out.s_u[i] = b * batch.labels[i];
  }
  return out;
}

AlphaBetaResult solve_alpha_beta(const GroupSums& sums, double lambda, const TrainConfig& config) {
  config.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("solve_alpha_beta needs lambda > 0");
  if (sums.size() == 0) throw ValidationError("solve_alpha_beta needs a non-empty sample");
  const double wr = static_cast<double>(sums.r);
  const double wu = static_cast<double>(sums.d - sums.r);

  auto objective = [&](const Moments& m, double a, double b) {
    return m.loss + 0.5 * lambda * (wr * a * a + wu * b * b);
  };

  AlphaBetaResult out;
  out.n = sums.size();
  double alpha = 0.0;
  double beta = 0.0;
  Moments m = accumulate(sums, alpha, beta, config.chunks, true);
  double f = objective(m, alpha, beta);
  for (std::size_t it = 0; it < config.max_steps; ++it) {
    const double ga = m.grad[0] + lambda * wr * alpha;
    const double gb = m.grad[1] + lambda * wu * beta;
    out.grad_norm = std::max(std::abs(ga), std::abs(gb));
    out.iterations = it;
    if (out.grad_norm < config.grad_tol) {
      out.converged = true;
      break;
    }
    const double haa = m.hess[0] + lambda * wr;
    const double hab = m.hess[1];
    const double hbb = m.hess[2] + lambda * wu;
    const double det = haa * hbb - hab * hab;
    double da = -(hbb * ga - hab * gb) / det;
    double db = -(haa * gb - hab * ga) / det;
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      const Moments trial = accumulate(sums, alpha + t * da, beta + t * db, config.chunks, false);
      const double ft = objective(trial, alpha + t * da, beta + t * db);
      if (ft <= f + config.sufficient_decrease * t * (ga * da + gb * db)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    alpha += t * da;
    beta += t * db;
    m = accumulate(sums, alpha, beta, config.chunks, true);
    f = objective(m, alpha, beta);
    out.iterations = it + 1;
  }
  if (!out.converged) {
    const double ga = m.grad[0] + lambda * wr * alpha;
    const double gb = m.grad[1] + lambda * wu * beta;
    out.grad_norm = std::max(std::abs(ga), std::abs(gb));
    out.converged = out.grad_norm < config.grad_tol;
  }
  if (!out.converged) {
    throw NumericalError("alpha/beta solver did not converge (gradient " + csv::number(out.grad_norm) + ")");
  }
  out.alpha = alpha;
  out.beta = beta;

  // Sandwich covariance H^-1 C H^-1 / n with C the covariance of the
  // per-sample estimating function (its mean is zero at the optimum).
  const double n = static_cast<double>(sums.size());
  const double haa = m.hess[0] + lambda * wr;
  const double hab = m.hess[1];
  const double hbb = m.hess[2] + lambda * wu;
  const double det = haa * hbb - hab * hab;
  const double ia = hbb / det;
  const double ib = -hab / det;
  const double ic = haa / det;
  const double caa = m.score[0] - m.grad[0] * m.grad[0];
  const double cab = m.score[1] - m.grad[0] * m.grad[1];
  const double cbb = m.score[2] - m.grad[1] * m.grad[1];
  // V = Hinv C Hinv, Hinv = [[ia, ib], [ib, ic]].
  const double t00 = ia * caa + ib * cab;
  const double t01 = ia * cab + ib * cbb;
  const double t10 = ib * caa + ic * cab;
  const double t11 = ib * cab + ic * cbb;
  const double vaa = (t00 * ia + t01 * ib) / n;
  const double vab = (t00 * ib + t01 * ic) / n;
  const double vbb = (t10 * ib + t11 * ic) / n;
  out.se_alpha = std::sqrt(std::max(vaa, 0.0));
  out.se_beta = std::sqrt(std::max(vbb, 0.0));
  out.se_difference = std::sqrt(std::max(vaa - 2.0 * vab + vbb, 0.0));
  if (beta != 0.0) {
    const double ra = 1.0 / beta;
    const double rb = -alpha / (beta * beta);
    out.se_ratio = std::sqrt(std::max(ra * ra * vaa + 2.0 * ra * rb * vab + rb * rb * vbb, 0.0));
  }
  return out;
}

AlphaBetaResult solve_alpha_beta(const TheorySpec& spec, double lambda, const TrainConfig& config) {
  return solve_alpha_beta(group_sums(spec), lambda, config);
}

}  // namespace nudg
