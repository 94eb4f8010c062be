#include "nudg/verifier.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nudg/alpha_beta.hpp"
#include "nudg/csv.hpp"
#include "nudg/error.hpp"
#include "nudg/linalg.hpp"
#include "nudg/losses.hpp"
#include "nudg/models.hpp"
#include "nudg/parallel.hpp"
#include "nudg/rank_solver.hpp"
#include "nudg/rng.hpp"
#include "nudg/trainer.hpp"

namespace nudg {

namespace {

CheckRecord record(std::string name, double measured, double target, double se, Relation relation,
                   std::uint64_t seed, std::size_t n) {
  CheckRecord c;
  c.name = std::move(name);
  c.measured = measured;
  c.target = target;
  c.std_error = se;
  c.relation = relation;
  c.seed = seed;
  c.n = n;
  return c;
}

double binomial_se(double p, std::size_t n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n)); }

// Raw power sums of a pooled scalar sample.
struct PowerSums {
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  std::size_t count = 0;

  void add(double x) {
    const double x2 = x * x;
    s1 += x;
    s2 += x2;
    s3 += x2 * x;
    s4 += x2 * x2;
    ++count;
  }
  void merge(const PowerSums& o) {
    s1 += o.s1;
    s2 += o.s2;
    s3 += o.s3;
    s4 += o.s4;
    count += o.count;
  }
  double mean() const { return s1 / static_cast<double>(count); }
  double variance() const {
    const double m = mean();
    return s2 / static_cast<double>(count) - m * m;
  }
  double mean_se() const { return std::sqrt(variance() / static_cast<double>(count)); }
  double variance_se() const {
    const double n = static_cast<double>(count);
    const double m = mean();
    const double e2 = s2 / n, e3 = s3 / n, e4 = s4 / n;
    const double m4 = e4 - 4.0 * m * e3 + 6.0 * m * m * e2 - 3.0 * m * m * m * m;
    const double v = variance();
    return std::sqrt(std::max(m4 - v * v, 0.0) / n);
  }
};

struct MomentPass {
  PowerSums inv;
  PowerSums env;
  std::size_t env_tail = 0;  // sum over U <= 0
  std::size_t inv_tail = 0;  // sum over R <= r/4
  // Cross sums for correlations of (z0, z1), (zr, zr+1), (z0, zr).
  std::array<double, 3> cross{};
  std::array<double, 4> single{};   // z0, z1, zr, zr+1
  std::array<double, 4> squares{};

  void merge(const MomentPass& o) {
    inv.merge(o.inv);
    env.merge(o.env);
    env_tail += o.env_tail;
    inv_tail += o.inv_tail;
    for (int k = 0; k < 3; ++k) cross[k] += o.cross[k];
    for (int k = 0; k < 4; ++k) {
      single[k] += o.single[k];
      squares[k] += o.squares[k];
    }
  }
};

MomentPass moment_pass(const TheorySpec& spec, std::size_t chunks) {
  const double quarter = static_cast<double>(spec.r) / 4.0;
  auto parts = parallel::chunked<MomentPass>(spec.n, chunks, [&](std::size_t lo, std::size_t hi, MomentPass& p) {
    std::vector<double> z(spec.d);
    for (std::size_t i = lo; i < hi; ++i) {
      draw_theory_sample(spec, i, z);
      double sr = 0.0;
      double su = 0.0;
      for (std::size_t j = 0; j < spec.r; ++j) {
        p.inv.add(z[j]);
        sr += z[j];
      }
      for (std::size_t j = spec.r; j < spec.d; ++j) {
        p.env.add(z[j]);
        su += z[j];
      }
      if (su <= 0.0) ++p.env_tail;
      if (sr <= quarter) ++p.inv_tail;
      const std::array<double, 4> v{z[0], z[spec.r > 1 ? 1 : 0], z[spec.r], z[spec.r + 1 < spec.d ? spec.r + 1 : spec.r]};
      p.cross[0] += v[0] * v[1];
      p.cross[1] += v[2] * v[3];
      p.cross[2] += v[0] * v[2];
      for (int k = 0; k < 4; ++k) {
        p.single[k] += v[k];
        p.squares[k] += v[k] * v[k];
      }
    }
  });
  MomentPass total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

double correlation(double sxy, double sx, double sy, double sxx, double syy, double n) {
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double vx = sxx / n - (sx / n) * (sx / n);
  const double vy = syy / n - (sy / n) * (sy / n);
  return cov / std::sqrt(vx * vy);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Per-coordinate sandwich standard errors of the weight-decay solution w on
// this batch: diag(H^-1 C H^-1) / n.
std::vector<double> sandwich_standard_errors(const SampleBatch& batch, std::span<const double> w, double lambda) {
  const std::size_t n = batch.size();
  const std::size_t d = batch.inputs.cols();
  Matrix h(d, d);
  Matrix c(d, d);
  std::vector<double> gbar(d, 0.0);
  std::vector<double> z(d);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = batch.inputs.row(i);
    const double y = batch.labels[i];
    double m = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      z[j] = y * x[j];
      m += w[j] * z[j];
    }
    const double g = logistic_prime(m);
    const double s = logistic_second(m);
    for (std::size_t j = 0; j < d; ++j) {
      gbar[j] += g * z[j];
      const double hj = s * z[j];
      const double cj = g * g * z[j];
      double* hrow = &h(j, 0);
      double* crow = &c(j, 0);
      for (std::size_t k = j; k < d; ++k) {
        hrow[k] += hj * z[k];
        crow[k] += cj * z[k];
      }
    }
  }
  const double nn = static_cast<double>(n);
  for (double& g : gbar) g /= nn;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j; k < d; ++k) {
      const double hv = h(j, k) / nn + (j == k ? lambda : 0.0);
      const double cv = c(j, k) / nn - gbar[j] * gbar[k];
      h(j, k) = h(k, j) = hv;
      c(j, k) = c(k, j) = cv;
    }
  }
  const Matrix x = solve_spd(h, c);
  const Matrix v = solve_spd(h, x.transposed());
  std::vector<double> se(d);
  for (std::size_t j = 0; j < d; ++j) se[j] = std::sqrt(std::max(v(j, j), 0.0) / nn);
  return se;
}

std::vector<double> central_difference(const Model& model, const SampleBatch& batch, const Objective& objective,
                                       double step) {
  std::vector<double> p = parameters(model);
  std::vector<double> out(p.size());
  Model probe = model;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double orig = p[k];
    p[k] = orig + step;
    set_parameters(probe, p);
    const double up = risk(probe, batch, objective);
    p[k] = orig - step;
    set_parameters(probe, p);
    const double down = risk(probe, batch, objective);
    p[k] = orig;
    out[k] = (up - down) / (2.0 * step);
  }
  return out;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
  return diff / std::max(max_abs(b), 1e-12);
}

}  // namespace

std::string_view to_string(CheckStatus s) noexcept {
  switch (s) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "fail";
    case CheckStatus::kOutOfRegime: return "out-of-regime";
  }
  return "?";
}

std::string_view to_string(Relation r) noexcept {
  switch (r) {
    case Relation::kBelow: return "<";
    case Relation::kAbove: return ">";
    case Relation::kAtMost: return "<=";
    case Relation::kAtLeast: return ">=";
    case Relation::kWithin: return "~";
    case Relation::kEqual: return "==";
  }
  return "?";
}

CheckStatus CheckRecord::status() const noexcept {
  if (out_of_regime) return CheckStatus::kOutOfRegime;
  const double slack = sigmas * std_error;
  bool ok = false;
  switch (relation) {
    case Relation::kBelow: ok = measured + slack < target; break;
    case Relation::kAbove: ok = measured - slack > target; break;
    case Relation::kAtMost: ok = measured <= target + slack; break;
    case Relation::kAtLeast: ok = measured >= target - slack; break;
    case Relation::kWithin: ok = std::abs(measured - target) <= slack; break;
    case Relation::kEqual: ok = measured == target; break;
  }
  return ok ? CheckStatus::kPass : CheckStatus::kFail;
}

void VerificationReport::append(const VerificationReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

void VerificationReport::sort_by_name() {
  std::stable_sort(checks.begin(), checks.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
}

bool VerificationReport::all_passed() const noexcept { return count(CheckStatus::kFail) == 0; }

std::size_t VerificationReport::count(CheckStatus s) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [s](const CheckRecord& c) { return c.status() == s; }));
}

const CheckRecord* VerificationReport::find(std::string_view name) const noexcept {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string VerificationReport::csv() const {
  std::ostringstream out;
  out << "check,measured,target,stderr,pass,seed,n\n";
  for (const auto& c : checks) {
    out << c.name << ',' << csv::number(c.measured) << ',' << csv::number(c.target) << ','
        << csv::number(c.std_error) << ',' << to_string(c.status()) << ',' << c.seed << ',' << c.n << '\n';
  }
  return out.str();
}

std::string VerificationReport::summary() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    std::string tag(to_string(c.status()));
    std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char ch) { return std::toupper(ch); });
    out << tag << "  " << c.name << ": " << csv::number(c.measured) << ' ' << to_string(c.relation) << ' '
        << csv::number(c.target);
    if (c.relation != Relation::kEqual && c.std_error > 0.0) {
      out << " (se " << csv::number(c.std_error) << ", " << c.sigmas << " sigma)";
    }
    out << '\n';
  }
  out << checks.size() << " checks: " << count(CheckStatus::kPass) << " passed, " << count(CheckStatus::kFail)
      << " failed, " << count(CheckStatus::kOutOfRegime) << " out of regime\n";
  return out.str();
}

VerificationReport verify_loss_properties(std::uint64_t seed) {
  VerificationReport report;
  rng::SplitMix64 gen(seed);
  constexpr std::size_t kTrials = 10'000;

  double decay = -std::numeric_limits<double>::infinity();
  double convex = -std::numeric_limits<double>::infinity();
  double concave = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < kTrials; ++t) {
    const double z = -50.0 + 100.0 * gen.uniform();
    const double c = 50.0 * gen.uniform_open0();
    decay = std::max(decay, logistic_prime(z + c) - std::exp(-c) * logistic_prime(z));

    double a = -50.0 + 100.0 * gen.uniform();
    double b = -50.0 + 100.0 * gen.uniform();
    if (a > b) std::swap(a, b);
    convex = std::max(convex, logistic(0.5 * (a + b)) - 0.5 * (logistic(a) + logistic(b)));

    double p = 50.0 * gen.uniform();
    double q = 50.0 * gen.uniform();
    concave = std::max(concave, 0.5 * (logistic_prime(p) + logistic_prime(q)) - logistic_prime(0.5 * (p + q)));
  }
  report.checks.push_back(record("loss/decay-inequality-slack", decay, 1e-12, 0.0, Relation::kAtMost, seed, kTrials));
  report.checks.push_back(record("loss/convexity-slack", convex, 1e-12, 0.0, Relation::kAtMost, seed, kTrials));
  report.checks.push_back(
      record("loss/prime-concavity-slack", concave, 1e-12, 0.0, Relation::kAtMost, seed, kTrials));

  constexpr std::size_t kGrid = 140'001;
  double prime_max = -std::numeric_limits<double>::infinity();
  double complement_min = std::numeric_limits<double>::infinity();
  double loss_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kGrid; ++k) {
    const double z = -700.0 + 1400.0 * static_cast<double>(k) / static_cast<double>(kGrid - 1);
    prime_max = std::max(prime_max, logistic_prime(z));
    complement_min = std::min(complement_min, logistic_prime_complement(z));
    loss_min = std::min(loss_min, logistic(z));
  }
  report.checks.push_back(record("loss/prime-below-zero", prime_max, 0.0, 0.0, Relation::kBelow, 0, kGrid));
  report.checks.push_back(
      record("loss/prime-above-minus-one", complement_min, 0.0, 0.0, Relation::kAbove, 0, kGrid));
  report.checks.push_back(record("loss/positive", loss_min, 0.0, 0.0, Relation::kAbove, 0, kGrid));
  return report;
}

VerificationReport verify_bounds_and_moments(const TheorySpec& spec) {
  spec.validate();
  if (spec.n < 2) throw ValidationError("verify_bounds_and_moments needs n >= 2");
  VerificationReport report;
  TheorySpec id = spec;
  id.domain = Domain::kId;
  TheorySpec ood = spec;
  ood.domain = Domain::kOod;
  ood.seed = rng::derive_seed(spec.seed, "moments/ood");

  const MomentPass p = moment_pass(id, 1);
  const double g = spec.gamma;
  const std::size_t n = spec.n;
  report.checks.push_back(record("moments/invariant-mean", p.inv.mean(), 0.5, p.inv.mean_se(), Relation::kWithin,
                                 id.seed, p.inv.count));
  report.checks.push_back(record("moments/invariant-variance", p.inv.variance(), 1.0 / 12.0, p.inv.variance_se(),
                                 Relation::kWithin, id.seed, p.inv.count));
  report.checks.push_back(record("moments/environmental-mean", p.env.mean(), g, p.env.mean_se(), Relation::kWithin,
                                 id.seed, p.env.count));
  report.checks.push_back(record("moments/environmental-variance", p.env.variance(), 1.0 / 3.0 - g * g,
                                 p.env.variance_se(), Relation::kWithin, id.seed, p.env.count));

  const double env_bound = std::exp(-static_cast<double>(spec.d - spec.r) * g * g / 2.0);
  const double inv_bound = std::exp(-static_cast<double>(spec.r) / 8.0);
  report.checks.push_back(record("hoeffding/environmental-sum-nonpositive",
                                 static_cast<double>(p.env_tail) / static_cast<double>(n), env_bound,
                                 binomial_se(env_bound, n), Relation::kAtMost, id.seed, n));
  report.checks.push_back(record("hoeffding/invariant-sum-below-quarter",
                                 static_cast<double>(p.inv_tail) / static_cast<double>(n), inv_bound,
                                 binomial_se(inv_bound, n), Relation::kAtMost, id.seed, n));

  const double nn = static_cast<double>(n);
  const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {2, 3}, {0, 2}}};
  double worst = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [a, b] = pairs[k];
    worst = std::max(worst, std::abs(correlation(p.cross[k], p.single[a], p.single[b], p.squares[a], p.squares[b], nn)));
  }
  report.checks.push_back(
      record("moments/coordinate-correlation", worst, 0.0, 1.0 / std::sqrt(nn), Relation::kWithin, id.seed, n));

  const MomentPass q = moment_pass(ood, 1);
  report.checks.push_back(record("moments/ood-environmental-mean", q.env.mean(), -g, q.env.mean_se(),
                                 Relation::kWithin, ood.seed, q.env.count));

  return report;
}

VerificationReport verify_gradient_formulas(std::uint64_t seed) {
  VerificationReport report;
  rng::SplitMix64 gen(rng::derive_seed(seed, "gradients/weights"));

  TheorySpec spec{.r = 4, .d = 8, .gamma = 0.3, .domain = Domain::kId, .n = 2000,
                  .seed = rng::derive_seed(seed, "gradients/batch"), .allow_out_of_regime = true};
  const SampleBatch batch = sample_theory(spec);
  TheoryModel tm{std::vector<double>(spec.d), std::nullopt};
  for (double& w : tm.w) w = -0.5 + gen.uniform();
  const double lambda = 0.1;

  // Closed form E[l'(y f(x)) z_j] + lambda w_j, evaluated directly.
  std::vector<double> expected(spec.d, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto x = batch.inputs.row(i);
    const double y = batch.labels[i];
    double f = 0.0;
    for (std::size_t j = 0; j < spec.d; ++j) f += tm.w[j] * x[j];
    const double lp = logistic_prime(y * f);
    for (std::size_t j = 0; j < spec.d; ++j) expected[j] += lp * y * x[j];
  }
  for (std::size_t j = 0; j < spec.d; ++j) expected[j] = expected[j] / static_cast<double>(batch.size()) + lambda * tm.w[j];
  const Model model = tm;
  const Objective l2 = Objective::weight_decay(lambda);
  const auto g = std::get<TheoryModel>(gradient(model, batch, l2)).w;
  report.checks.push_back(record("gradients/theory-closed-form", relative_error(g, expected), 1e-12, 0.0,
                                 Relation::kAtMost, spec.seed, batch.size()));
  report.checks.push_back(record("gradients/theory-finite-difference",
                                 relative_error(g, central_difference(model, batch, l2, 1e-6)), 1e-4, 0.0,
                                 Relation::kBelow, spec.seed, batch.size()));

  Synthetic2dSpec s2{.flip_prob = 0.7, .domain = Domain::kId, .n = 400,
                     .seed = rng::derive_seed(seed, "gradients/synth2d")};
  const SampleBatch b2 = sample_synthetic2d(s2);
  const Model lin = random_linear_model(2, 2, rng::derive_seed(seed, "gradients/linear"), 1.0);
  const Objective nu = Objective::nuclear(0.05);
  const auto gl = parameters(gradient(lin, b2, nu));
  report.checks.push_back(record("gradients/nuclear-finite-difference",
                                 relative_error(gl, central_difference(lin, b2, nu, 1e-6)), 1e-4, 0.0,
                                 Relation::kBelow, s2.seed, b2.size()));

  // At w = 0 and gamma = 0 the gradient is -E[z_j] / 2: -1/4 on R, 0 on U.
  TheorySpec sym{.r = 4, .d = 8, .gamma = 0.0, .domain = Domain::kId, .n = 100'000,
                 .seed = rng::derive_seed(seed, "gradients/zero"), .allow_out_of_regime = true};
  const SampleBatch zb = sample_theory(sym);
  const auto g0 = std::get<TheoryModel>(gradient(TheoryModel{std::vector<double>(sym.d), std::nullopt}, zb,
                                                 Objective::erm()))
                      .w;
  double worst = 0.0;
  for (std::size_t j = 0; j < sym.d; ++j) {
    const bool inv = j < sym.r;
    const double mean = inv ? -0.25 : 0.0;
    const double se = 0.5 * std::sqrt((inv ? 1.0 / 12.0 : 1.0 / 3.0) / static_cast<double>(sym.n));
    worst = std::max(worst, std::abs(g0[j] - mean) / se);
  }
  report.checks.push_back(
      record("gradients/zero-weight-expectation-z", worst, kCheckSigmas, 0.0, Relation::kBelow, sym.seed, sym.n));
  return report;
}

VerificationReport verify_lemma1(const TheorySpec& spec, double lambda, const Lemma1Options& options) {
  TheorySpec checked = spec;
  checked.n = options.n_full;
  checked.validate();
  if (!(lambda > 0.0)) throw ValidationError("verify_lemma1 needs lambda > 0");
  const bool oor = !spec.in_regime();
  VerificationReport report;
  TrainConfig config = TrainConfig::theory_defaults();
  config.chunks = options.chunks;
  config.grad_tol = 1e-10;

  TheorySpec reduced = spec;
  reduced.domain = Domain::kId;
  reduced.n = options.n_reduced;
  reduced.seed = rng::derive_seed(spec.seed, "lemma1/reduced");
  const AlphaBetaResult ab = solve_alpha_beta(reduced, lambda, config);
  const double inv_sqrt_r = 1.0 / std::sqrt(static_cast<double>(spec.r));
  const double ratio_cap = 3.0 / (4.0 * spec.gamma);
  const std::size_t nr = reduced.n;
  const std::uint64_t sr = reduced.seed;
  report.checks.push_back(record("lemma1/beta-positive", ab.beta, 0.0, ab.se_beta, Relation::kAbove, sr, nr));
  report.checks.push_back(
      record("lemma1/alpha-minus-beta-positive", ab.alpha - ab.beta, 0.0, ab.se_difference, Relation::kAbove, sr, nr));
  report.checks.push_back(
      record("lemma1/alpha-below-inv-sqrt-r", ab.alpha, inv_sqrt_r, ab.se_alpha, Relation::kBelow, sr, nr));
  report.checks.push_back(record("lemma1/ratio-below-3-over-4gamma", ab.alpha / ab.beta, ratio_cap, ab.se_ratio,
                                 Relation::kBelow, sr, nr));

  TheorySpec full = spec;
  full.domain = Domain::kId;
  full.n = options.n_full;
  full.seed = rng::derive_seed(spec.seed, "lemma1/full");
  const SampleBatch batch = sample_theory(full);
  TrainConfig full_config = TrainConfig::theory_defaults();
  full_config.chunks = options.chunks;
  const TrainResult trained =
      train(TheoryModel{std::vector<double>(spec.d, 0.0), std::nullopt}, batch, Objective::weight_decay(lambda),
            full_config);
  const auto& w = std::get<TheoryModel>(trained.model).w;
  const std::vector<double> se = sandwich_standard_errors(batch, w, lambda);

  double worst = 0.0;
  PowerSums wr, wu;
  double se_r = 0.0, se_u = 0.0;
  for (std::size_t j = 0; j < spec.d; ++j) {
    const bool inv = j < spec.r;
    const double target = inv ? ab.alpha : ab.beta;
    const double pattern_se = inv ? ab.se_alpha : ab.se_beta;
    worst = std::max(worst, std::abs(w[j] - target) / std::hypot(se[j], pattern_se));
    (inv ? wr : wu).add(w[j]);
    (inv ? se_r : se_u) += se[j];
  }
  se_r /= static_cast<double>(spec.r);
  se_u /= static_cast<double>(spec.d - spec.r);
  report.checks.push_back(
      record("lemma1/full-d-max-standardized-deviation", worst, kCheckSigmas, 0.0, Relation::kBelow, full.seed, full.n));
  report.checks.push_back(record("lemma1/full-d-spread-invariant", std::sqrt(wr.variance()), kCheckSigmas * se_r, 0.0,
                                 Relation::kBelow, full.seed, full.n));
  report.checks.push_back(record("lemma1/full-d-spread-environmental", std::sqrt(wu.variance()),
                                 kCheckSigmas * se_u, 0.0, Relation::kBelow, full.seed, full.n));
  report.checks.push_back(record("lemma1/full-d-converged", trained.converged ? 1.0 : 0.0, 1.0, 0.0,
                                 Relation::kEqual, full.seed, full.n));
  for (auto& c : report.checks) c.out_of_regime = oor;
  return report;
}

VerificationReport verify_lemma2(const TheorySpec& spec, std::size_t b_rank, const Lemma2Options& options) {
  TheorySpec id = spec;
  id.domain = Domain::kId;
  id.n = options.n;
  // The support claim needs only an environmental bias in (0, 1/2).
  id.allow_out_of_regime = true;
  id.validate();
  const bool oor = !(spec.gamma > 0.0 && spec.gamma < 0.5);

  const SampleBatch batch = sample_theory(id);
  RankSolveOptions rank_options;
  TrainConfig config = TrainConfig::theory_defaults();
  config.max_steps = options.max_steps;
  const RankResult result = train_rank_constrained(batch, Objective::rank(b_rank), rank_options, config);

  std::size_t outside = 0;
  double min_weight = std::numeric_limits<double>::infinity();
  const auto& w = std::get<TheoryModel>(result.train.model).w;
  for (std::size_t j : result.support) {
    if (j >= spec.r) ++outside;
    min_weight = std::min(min_weight, w[j]);
  }
  const std::string prefix =
      "lemma2/" + std::string(to_string(result.strategy_used)) + "-b" + std::to_string(b_rank) + "/";
  VerificationReport report;
  report.checks.push_back(record(prefix + "support-outside-R", static_cast<double>(outside), 0.0, 0.0,
                                 Relation::kEqual, id.seed, id.n));
  report.checks.push_back(
      record(prefix + "support-weights-positive", min_weight, 0.0, 0.0, Relation::kAbove, id.seed, id.n));
  for (auto& c : report.checks) c.out_of_regime = oor;
  return report;
}

VerificationReport verify_proposition1(const TheorySpec& spec, double lambda, std::size_t b_rank,
                                       const Proposition1Options& options) {
  TheorySpec checked = spec;
  checked.n = options.n_train;
  checked.validate();
  if (!(lambda > 0.0)) throw ValidationError("verify_proposition1 needs lambda > 0");
  const double r = static_cast<double>(spec.r);
  const double d_floor = r / (spec.gamma * spec.gamma) + r;
  const bool assumptions = b_rank >= 1 && b_rank <= spec.r && static_cast<double>(spec.d) > d_floor && spec.r >= 20;
  if (!assumptions && !spec.allow_out_of_regime) {
    throw ValidationError("proposition assumptions violated: need 1 <= b_rank <= r, d > r/gamma^2 + r, r >= 20");
  }
  const bool oor = !assumptions || !spec.in_regime();
  VerificationReport report;
  report.checks.push_back(record("prop1/assumption-b-rank-at-most-r", static_cast<double>(b_rank), r, 0.0,
                                 Relation::kAtMost, spec.seed, 0));
  report.checks.push_back(record("prop1/assumption-d-above-r-over-gamma2-plus-r", static_cast<double>(spec.d),
                                 d_floor, 0.0, Relation::kAbove, spec.seed, 0));
  report.checks.push_back(record("prop1/assumption-r-at-least-20", r, 20.0, 0.0, Relation::kAtLeast, spec.seed, 0));

  // Rank-constrained solution on an ID training batch.
  TheorySpec train_spec = spec;
  train_spec.domain = Domain::kId;
  train_spec.n = options.n_train;
  train_spec.seed = rng::derive_seed(spec.seed, "prop1/train");
  const SampleBatch batch = sample_theory(train_spec);
  TrainConfig config = TrainConfig::theory_defaults();
  config.max_steps = options.rank_steps;
  config.chunks = options.chunks;
  const RankResult rank = train_rank_constrained(batch, Objective::rank(b_rank), RankSolveOptions{}, config);
  const auto& w = std::get<TheoryModel>(rank.train.model).w;
  std::size_t outside = 0;
  for (std::size_t j : rank.support) outside += j >= spec.r ? 1 : 0;

  // Weight-decay solution through the reduced solver.
  TheorySpec reduced = spec;
  reduced.domain = Domain::kId;
  reduced.n = options.n_reduced;
  reduced.seed = rng::derive_seed(spec.seed, "prop1/reduced");
  TrainConfig ab_config = TrainConfig::theory_defaults();
  ab_config.grad_tol = 1e-10;
  ab_config.chunks = options.chunks;
  const AlphaBetaResult ab = solve_alpha_beta(reduced, lambda, ab_config);

  struct Hits {
    std::size_t rank = 0;
    std::size_t l2 = 0;
  };
  auto evaluate = [&](const TheorySpec& eval) {
    auto parts = parallel::chunked<Hits>(eval.n, options.chunks, [&](std::size_t lo, std::size_t hi, Hits& h) {
      std::vector<double> z(eval.d);
      for (std::size_t i = lo; i < hi; ++i) {
        const int y = draw_theory_sample(eval, i, z);
        double fr = 0.0;
        for (std::size_t j : rank.support) fr += w[j] * z[j];
        double sr = 0.0;
        double su = 0.0;
        for (std::size_t j = 0; j < eval.r; ++j) sr += z[j];
        for (std::size_t j = eval.r; j < eval.d; ++j) su += z[j];
        const double fl = ab.alpha * sr + ab.beta * su;
        if (predict_label(y * fr) == y) ++h.rank;
        if (predict_label(y * fl) == y) ++h.l2;
      }
    });
    Hits total;
    for (const auto& p : parts) {
      total.rank += p.rank;
      total.l2 += p.l2;
    }
    return total;
  };

  TheorySpec ood = spec;
  ood.domain = Domain::kOod;
  ood.n = options.n_eval;
  ood.seed = rng::derive_seed(spec.seed, "prop1/eval-ood");
  TheorySpec id = ood;
  id.domain = Domain::kId;
  id.seed = rng::derive_seed(spec.seed, "prop1/eval-id");
  const Hits ood_hits = evaluate(ood);
  const Hits id_hits = evaluate(id);
  const double ne = static_cast<double>(options.n_eval);
  const double rank_ood = static_cast<double>(ood_hits.rank) / ne;
  const double l2_ood = static_cast<double>(ood_hits.l2) / ne;
  const double l2_id = static_cast<double>(id_hits.l2) / ne;
  const double ceiling = std::exp(-r / 10.0);

  report.checks.push_back(record("prop1/erm-rank-support-outside-R", static_cast<double>(outside), 0.0, 0.0,
                                 Relation::kEqual, train_spec.seed, train_spec.n));
  report.checks.push_back(
      record("prop1/erm-rank-ood-accuracy", rank_ood, 1.0, binomial_se(rank_ood, ood.n), Relation::kEqual, ood.seed, ood.n));

  const std::size_t l2_first = report.checks.size();
  report.checks.push_back(record("prop1/lambda-regime-alpha-below-inv-sqrt-r", ab.alpha, 1.0 / std::sqrt(r),
                                 ab.se_alpha, Relation::kBelow, reduced.seed, reduced.n));
  report.checks.push_back(record("prop1/erm-l2-ood-accuracy-below-chance", l2_ood, 0.5, binomial_se(l2_ood, ood.n),
                                 Relation::kBelow, ood.seed, ood.n));
  report.checks.push_back(record("prop1/erm-l2-ood-accuracy-vs-exp-minus-r-over-10", l2_ood, ceiling,
                                 binomial_se(l2_ood, ood.n), Relation::kAtMost, ood.seed, ood.n));
  report.checks.push_back(record("prop1/erm-l2-id-accuracy", l2_id, 0.99, binomial_se(l2_id, id.n), Relation::kAbove,
                                 id.seed, id.n));
  // An unmet lambda assumption flags the weight-decay half of the claim
  // instead of failing it.
  const bool lambda_ok = report.checks[l2_first].status() == CheckStatus::kPass;
  for (std::size_t k = 0; k < report.checks.size(); ++k) {
    if (oor || (k >= l2_first && !lambda_ok)) report.checks[k].out_of_regime = true;
  }
  return report;
}

std::vector<std::string_view> suite_names() {
  return {"all", "loss", "moments", "gradients", "lemma1", "lemma2", "prop1"};
}

VerificationReport run_suite(std::string_view suite, const SuiteOptions& options) {
  const auto names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    throw ValidationError("unknown suite '" + std::string(suite) + "'");
  }
  const bool all = suite == "all";
  const std::uint64_t seed = options.seed;
  VerificationReport report;
  if (all || suite == "loss") report.append(verify_loss_properties(rng::derive_seed(seed, "verify/loss")));
  if (all || suite == "moments") {
    TheorySpec spec{.r = 32, .d = 200, .gamma = 0.4, .domain = Domain::kId, .n = 1'000'000,
                    .seed = rng::derive_seed(seed, "verify/moments"), .allow_out_of_regime = true};
    report.append(verify_bounds_and_moments(spec));
  }
  if (all || suite == "gradients") report.append(verify_gradient_formulas(rng::derive_seed(seed, "verify/gradients")));
  if (all || suite == "lemma1") {
    TheorySpec spec{.r = 49, .d = 300, .gamma = 0.45, .seed = rng::derive_seed(seed, "verify/lemma1")};
    report.append(verify_lemma1(spec, options.lambda, {.chunks = options.chunks}));
  }
  if (all || suite == "lemma2") {
    TheorySpec spec{.r = 4, .d = 8, .gamma = 0.4, .seed = rng::derive_seed(seed, "verify/lemma2"),
                    .allow_out_of_regime = true};
    for (std::size_t b : {1, 2, 4}) report.append(verify_lemma2(spec, b));
  }
  if (all || suite == "prop1") {
    TheorySpec spec{.r = 49, .d = 300, .gamma = 0.45, .seed = rng::derive_seed(seed, "verify/prop1")};
    report.append(verify_proposition1(spec, options.lambda, options.b_rank, {.chunks = options.chunks}));
  }
  report.sort_by_name();
  return report;
}

}  // namespace nudg
