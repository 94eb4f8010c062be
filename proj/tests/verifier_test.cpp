#include <gtest/gtest.h>

#include <cmath>

#include "nudg/error.hpp"
#include "nudg/verifier.hpp"

using namespace nudg;

namespace {

CheckRecord make(double measured, double target, double se, Relation rel) {
  CheckRecord c;
  c.name = "x";
  c.measured = measured;
  c.target = target;
  c.std_error = se;
  c.relation = rel;
  return c;
}

}  // namespace

TEST(CheckRecord, StatusIsAPureFunctionOfTheNumbers) {
  EXPECT_EQ(make(0.1, 0.5, 0.05, Relation::kBelow).status(), CheckStatus::kPass);
  EXPECT_EQ(make(0.31, 0.5, 0.05, Relation::kBelow).status(), CheckStatus::kFail);
  EXPECT_EQ(make(0.9, 0.5, 0.1, Relation::kAbove).status(), CheckStatus::kFail);
  EXPECT_EQ(make(0.91, 0.5, 0.1, Relation::kAbove).status(), CheckStatus::kPass);
  EXPECT_EQ(make(0.6, 0.5, 0.025, Relation::kAtMost).status(), CheckStatus::kPass);
  EXPECT_EQ(make(0.61, 0.5, 0.025, Relation::kAtMost).status(), CheckStatus::kFail);
  EXPECT_EQ(make(0.4, 0.5, 0.025, Relation::kAtLeast).status(), CheckStatus::kPass);
  EXPECT_EQ(make(0.55, 0.5, 0.01, Relation::kWithin).status(), CheckStatus::kFail);
  EXPECT_EQ(make(0.539, 0.5, 0.01, Relation::kWithin).status(), CheckStatus::kPass);
  EXPECT_EQ(make(1.0, 1.0, 0.5, Relation::kEqual).status(), CheckStatus::kPass);
  EXPECT_EQ(make(0.999999, 1.0, 0.5, Relation::kEqual).status(), CheckStatus::kFail);
  CheckRecord c = make(1.0, 0.0, 0.0, Relation::kBelow);
  c.out_of_regime = true;
  EXPECT_EQ(c.status(), CheckStatus::kOutOfRegime);
}

TEST(Report, CsvAndSummary) {
  VerificationReport r;
  r.checks.push_back(make(0.1, 0.5, 0.05, Relation::kBelow));
  r.checks.back().name = "b/second";
  r.checks.push_back(make(2.0, 0.5, 0.0, Relation::kBelow));
  r.checks.back().name = "a/first";
  r.sort_by_name();
  EXPECT_EQ(r.checks.front().name, "a/first");
  EXPECT_FALSE(r.all_passed());
  EXPECT_EQ(r.count(CheckStatus::kFail), 1u);
  const std::string csv = r.csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "check,measured,target,stderr,pass,seed,n");
  EXPECT_NE(csv.find("a/first,2,0.5,0,fail,0,0"), std::string::npos);
  EXPECT_NE(r.summary().find("2 checks: 1 passed, 1 failed, 0 out of regime"), std::string::npos);
  ASSERT_NE(r.find("b/second"), nullptr);
  EXPECT_EQ(r.find("missing"), nullptr);
}

TEST(Verify, LossPropertiesPass) {
  const VerificationReport r = verify_loss_properties(3);
  EXPECT_EQ(r.checks.size(), 6u);
  EXPECT_TRUE(r.all_passed()) << r.summary();
}

TEST(Verify, MomentsAndTailsPass) {
  const VerificationReport r =
      verify_bounds_and_moments({.r = 32, .d = 200, .gamma = 0.4, .n = 50'000, .seed = 5, .allow_out_of_regime = true});
  EXPECT_TRUE(r.all_passed()) << r.summary();
  EXPECT_NE(r.find("hoeffding/environmental-sum-nonpositive"), nullptr);
}

TEST(Verify, GradientFormulasPass) {
  const VerificationReport r = verify_gradient_formulas(11);
  EXPECT_TRUE(r.all_passed()) << r.summary();
}

TEST(Verify, RankSupportInsideInvariantSet) {
  const TheorySpec spec{.r = 4, .d = 8, .gamma = 0.4, .seed = 9};
  for (std::size_t b : {1, 2, 4}) {
    const VerificationReport r = verify_lemma2(spec, b, {.n = 2000, .max_steps = 150});
    EXPECT_TRUE(r.all_passed()) << r.summary();
    EXPECT_EQ(r.count(CheckStatus::kOutOfRegime), 0u);
  }
}

TEST(Verify, RankSupportZeroGammaIsOutOfRegime) {
  const VerificationReport r = verify_lemma2({.r = 4, .d = 8, .gamma = 0.0, .seed = 1}, 2, {.n = 1000, .max_steps = 50});
  EXPECT_EQ(r.count(CheckStatus::kOutOfRegime), r.checks.size());
  EXPECT_TRUE(r.all_passed());
}

TEST(Verify, WeightDecayStructureSmallScale) {
  const VerificationReport r =
      verify_lemma1({.r = 49, .d = 300, .gamma = 0.45, .seed = 2}, 0.05, {.n_reduced = 100'000, .n_full = 8'000});
  EXPECT_TRUE(r.all_passed()) << r.summary();
}

TEST(Verify, OodGapAssumptionsEnforced) {
  EXPECT_THROW(verify_proposition1({.r = 49, .d = 200, .gamma = 0.45, .seed = 1}, 0.05, 10), ValidationError);
  EXPECT_THROW(verify_proposition1({.r = 49, .d = 300, .gamma = 0.45, .seed = 1}, 0.05, 50), ValidationError);
  const VerificationReport r =
      verify_proposition1({.r = 49, .d = 200, .gamma = 0.45, .seed = 1, .allow_out_of_regime = true}, 0.05, 5,
                          {.n_train = 500, .rank_steps = 20, .n_reduced = 5000, .n_eval = 5000});
  EXPECT_EQ(r.count(CheckStatus::kOutOfRegime), r.checks.size());
}

TEST(Verify, OodGapSmallScale) {
  const VerificationReport r = verify_proposition1({.r = 49, .d = 300, .gamma = 0.45, .seed = 4}, 0.05, 10,
                                                   {.n_train = 2000, .rank_steps = 50, .n_reduced = 50'000,
                                                    .n_eval = 50'000});
  EXPECT_TRUE(r.all_passed()) << r.summary();
  EXPECT_EQ(r.find("prop1/erm-rank-ood-accuracy")->measured, 1.0);
}

TEST(Suite, NamesAndErrors) {
  EXPECT_EQ(suite_names().front(), "all");
  EXPECT_THROW(run_suite("nope", {}), ValidationError);
  const VerificationReport r = run_suite("loss", {});
  EXPECT_EQ(r.checks.size(), 6u);
  EXPECT_EQ(r.csv(), run_suite("loss", {}).csv());
}
