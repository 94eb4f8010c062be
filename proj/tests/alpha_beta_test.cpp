#include <gtest/gtest.h>

#include <cmath>

#include "nudg/alpha_beta.hpp"
#include "nudg/error.hpp"
#include "nudg/losses.hpp"
#include "oracles.hpp"

using namespace nudg;

namespace {

TrainConfig tight() {
  TrainConfig c = TrainConfig::theory_defaults();
  c.grad_tol = 1e-10;
  return c;
}

double reduced_objective(const GroupSums& s, double lambda, double a, double b) {
  double loss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) loss += logistic(a * s.s_r[i] + b * s.s_u[i]);
  return loss / s.size() + 0.5 * lambda * (s.r * a * a + (s.d - s.r) * b * b);
}

}  // namespace

TEST(AlphaBeta, GroupSumsAgreeBetweenStreamAndBatch) {
  const TheorySpec spec{.r = 6, .d = 20, .gamma = 0.3, .n = 500, .seed = 2, .allow_out_of_regime = true};
  const GroupSums a = group_sums(spec);
  const GroupSums b = group_sums(sample_theory(spec), spec.r);
  for (std::size_t i = 0; i < spec.n; ++i) {
    EXPECT_NEAR(a.s_r[i], b.s_r[i], 1e-13);
    EXPECT_NEAR(a.s_u[i], b.s_u[i], 1e-13);
  }
}

TEST(AlphaBeta, StationaryPointOfReducedObjective) {
  const GroupSums s = group_sums(TheorySpec{.r = 49, .d = 300, .gamma = 0.45, .n = 20'000, .seed = 3});
  const AlphaBetaResult r = solve_alpha_beta(s, 0.05, tight());
  ASSERT_TRUE(r.converged);
  auto f = [&](const std::vector<double>& x) { return reduced_objective(s, 0.05, x[0], x[1]); };
  const auto g = oracle::central_differences(f, {r.alpha, r.beta}, 1e-6);
  EXPECT_LT(std::abs(g[0]), 1e-7);
  EXPECT_LT(std::abs(g[1]), 1e-7);
}

TEST(AlphaBeta, DefaultInstanceSatisfiesStructure) {
  const AlphaBetaResult r =
      solve_alpha_beta(TheorySpec{.r = 49, .d = 300, .gamma = 0.45, .n = 200'000, .seed = 4}, 0.05, tight());
  EXPECT_GT(r.beta - 4 * r.se_beta, 0.0);
  EXPECT_GT(r.alpha - r.beta - 4 * r.se_difference, 0.0);
  EXPECT_LT(r.alpha + 4 * r.se_alpha, 1.0 / 7.0);
  EXPECT_LT(r.alpha / r.beta + 4 * r.se_ratio, 3.0 / (4.0 * 0.45));
  EXPECT_GT(r.se_alpha, 0.0);
}

TEST(AlphaBeta, HeavyPenaltyShrinksToZero) {
  const AlphaBetaResult r =
      solve_alpha_beta(TheorySpec{.r = 49, .d = 300, .gamma = 0.45, .n = 20'000, .seed = 5}, 1e3, tight());
  EXPECT_LT(std::abs(r.alpha), 1e-3);
  EXPECT_LT(std::abs(r.beta), 1e-3);
}

TEST(AlphaBeta, AgreesWithFullDimensionalTrainer) {
  const TheorySpec spec{.r = 5, .d = 30, .gamma = 0.4, .n = 20'000, .seed = 6, .allow_out_of_regime = true};
  const SampleBatch batch = sample_theory(spec);
  const AlphaBetaResult r = solve_alpha_beta(group_sums(batch, spec.r), 0.05, tight());
  const TrainResult full = train(TheoryModel{std::vector<double>(spec.d), std::nullopt}, batch,
                                 Objective::weight_decay(0.05), TrainConfig::theory_defaults());
  ASSERT_TRUE(full.converged);
  const auto& w = std::get<TheoryModel>(full.model).w;
  double mr = 0.0, mu = 0.0;
  for (std::size_t j = 0; j < spec.d; ++j) (j < spec.r ? mr : mu) += w[j];
  mr /= spec.r;
  mu /= spec.d - spec.r;
  // Group means of the full solution track the symmetric solution; individual
  // coordinates scatter at the sampling-noise scale.
  EXPECT_NEAR(mr, r.alpha, 10 * r.se_alpha);
  EXPECT_NEAR(mu, r.beta, 10 * r.se_beta);
  for (std::size_t j = 0; j < spec.d; ++j) EXPECT_NEAR(w[j], j < spec.r ? r.alpha : r.beta, 0.05);
}

TEST(AlphaBeta, Validation) {
  const GroupSums s = group_sums(TheorySpec{.r = 4, .d = 8, .gamma = 0.3, .n = 10, .seed = 1, .allow_out_of_regime = true});
  EXPECT_THROW(solve_alpha_beta(s, 0.0, tight()), ValidationError);
  TrainConfig c = tight();
  c.max_steps = 1;
  c.grad_tol = 1e-300;
  EXPECT_THROW(solve_alpha_beta(s, 0.1, c), NumericalError);
}
