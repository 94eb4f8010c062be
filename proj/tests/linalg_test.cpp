#include <gtest/gtest.h>

#include <cmath>

#include "nudg/error.hpp"
#include "nudg/linalg.hpp"
#include "oracles.hpp"

using namespace nudg;

namespace {

Matrix reconstruct(const SvdResult& s) {
  Matrix us = s.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t k = 0; k < us.cols(); ++k) us(i, k) *= s.sigma[k];
  return oracle::naive_product(us, s.vt);
}

double orthonormality_defect(const Matrix& q, bool columns) {
  const Matrix g = columns ? oracle::naive_product(q.transposed(), q) : oracle::naive_product(q, q.transposed());
  return oracle::max_abs_diff(g, Matrix::identity(g.rows()));
}

}  // namespace

TEST(Matrix, ConstructionAndAccess) {
  Matrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.transposed()(2, 1), 6.0);
  EXPECT_THROW(Matrix(0, 3), ValidationError);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ValidationError);
}

TEST(Matrix, ProductsMatchNaiveLoops) {
  rng::SplitMix64 gen(11);
  const Matrix a = oracle::random_matrix(4, 3, gen);
  const Matrix b = oracle::random_matrix(3, 5, gen);
  const Matrix c = oracle::random_matrix(4, 5, gen);
  EXPECT_LT(oracle::max_abs_diff(a * b, oracle::naive_product(a, b)), 1e-14);
  EXPECT_LT(oracle::max_abs_diff(transpose_times(a, c), oracle::naive_product(a.transposed(), c)), 1e-14);
  EXPECT_THROW(a * c, ValidationError);
}

TEST(Svd, KnownTwoByTwo) {
  const Matrix m{{1, 2}, {3, 4}};
  const auto s = singular_values(m);
  EXPECT_NEAR(s[0], 5.464985704219043, 1e-13);
  EXPECT_NEAR(s[1], 0.3659661906262578, 1e-13);
  EXPECT_NEAR(nuclear_norm(m), 5.8309518948453, 1e-12);
  EXPECT_NEAR(spectral_norm(m), 5.464985704219043, 1e-13);
  EXPECT_NEAR(frobenius_norm(m), std::sqrt(30.0), 1e-13);
}

TEST(Svd, MatchesClosedFormOnRandomTwoByTwo) {
  rng::SplitMix64 gen(3);
  for (int t = 0; t < 500; ++t) {
    const Matrix m = oracle::random_matrix(2, 2, gen, 5.0);
    const auto expected = oracle::singular_values_2x2(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
    const auto s = singular_values(m);
    EXPECT_NEAR(s[0], expected[0], 1e-12 * (1 + expected[0]));
    EXPECT_NEAR(s[1], expected[1], 1e-11 * (1 + expected[0]));
  }
}

TEST(Svd, RecoversPrescribedSpectrum) {
  rng::SplitMix64 gen(5);
  for (int t = 0; t < 50; ++t) {
    const Matrix u = oracle::random_orthogonal(6, gen);
    const Matrix v = oracle::random_orthogonal(4, gen);
    const std::vector<double> sigma{9.0, 4.0, 1.5, 1e-3};
    Matrix core(6, 4);
    for (std::size_t k = 0; k < 4; ++k) core(k, k) = sigma[k];
    const Matrix m = oracle::naive_product(oracle::naive_product(u, core), v.transposed());
    const auto s = singular_values(m);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(s[k], sigma[k], 1e-12);
  }
}

class SvdShapes : public ::testing::TestWithParam<std::pair<std::size_t, std::size_t>> {};

TEST_P(SvdShapes, ReconstructsWithOrthonormalFactorsAndOrderedNorms) {
  const auto [rows, cols] = GetParam();
  rng::SplitMix64 gen(1000 * rows + cols);
  for (int t = 0; t < 200; ++t) {
    const Matrix m = oracle::random_matrix(rows, cols, gen, 3.0);
    const SvdResult s = svd(m);
    const std::size_t k = std::min(rows, cols);
    ASSERT_EQ(s.sigma.size(), k);
    EXPECT_LE(oracle::max_abs_diff(reconstruct(s), m), 1e-8 * std::max(1.0, oracle::frobenius(m)));
    EXPECT_LT(orthonormality_defect(s.u, true), 1e-10);
    EXPECT_LT(orthonormality_defect(s.vt, false), 1e-10);
    for (std::size_t i = 0; i + 1 < k; ++i) EXPECT_GE(s.sigma[i], s.sigma[i + 1]);
    EXPECT_GE(s.sigma.back(), 0.0);
    const double spec = spectral_norm(m), fro = frobenius_norm(m), nuc = nuclear_norm(m);
    EXPECT_LE(spec, fro * (1 + 1e-12));
    EXPECT_LE(fro, nuc * (1 + 1e-12));
    EXPECT_LE(nuc, std::sqrt(static_cast<double>(k)) * fro * (1 + 1e-12));
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, SvdShapes,
                         ::testing::Values(std::make_pair(1, 1), std::make_pair(1, 5), std::make_pair(5, 1),
                                           std::make_pair(3, 3), std::make_pair(7, 3), std::make_pair(3, 7),
                                           std::make_pair(10, 10), std::make_pair(40, 2)));

TEST(Svd, RankDeficientKeepsOrthonormalBasis) {
  const Matrix m{{1, 2, 3}, {2, 4, 6}, {-1, -2, -3}, {0, 0, 0}};
  const SvdResult s = svd(m);
  EXPECT_EQ(numeric_rank(m), 1u);
  EXPECT_LT(orthonormality_defect(s.u, true), 1e-12);
  EXPECT_LT(oracle::max_abs_diff(reconstruct(s), m), 1e-12);
  EXPECT_NEAR(stable_rank(m), 1.0, 1e-12);
}

TEST(Svd, ZeroMatrix) {
  const Matrix z(3, 2);
  const SvdResult s = svd(z);
  EXPECT_EQ(s.sigma, (std::vector<double>{0.0, 0.0}));
  EXPECT_LT(orthonormality_defect(s.u, true), 1e-12);
  EXPECT_EQ(numeric_rank(z), 0u);
  EXPECT_EQ(nuclear_norm(z), 0.0);
  EXPECT_THROW(stable_rank(z), NumericalError);
  EXPECT_EQ(nuclear_norm_subgradient(z), Matrix(3, 2));
}

TEST(Svd, RejectsNonFinite) {
  Matrix m(2, 2, 1.0);
  m(0, 1) = std::nan("");
  EXPECT_THROW(svd(m), ValidationError);
}

TEST(StableRank, BoundsAndExtremes) {
  EXPECT_NEAR(stable_rank(Matrix::identity(5)), 5.0, 1e-12);
  const std::vector<double> d{3.0, 1.0};
  EXPECT_NEAR(stable_rank(Matrix::diagonal(d)), 10.0 / 9.0, 1e-12);
  rng::SplitMix64 gen(9);
  for (int t = 0; t < 100; ++t) {
    const Matrix m = oracle::random_matrix(6, 4, gen);
    const double sr = stable_rank(m);
    EXPECT_GE(sr, 1.0 - 1e-12);
    EXPECT_LE(sr, 4.0 + 1e-12);
  }
}

TEST(NuclearSubgradient, MatchesCentralDifferences) {
  rng::SplitMix64 gen(21);
  for (int t = 0; t < 100; ++t) {
    const Matrix m = oracle::random_matrix(4, 3, gen);
    const Matrix g = nuclear_norm_subgradient(m);
    auto f = [&](const std::vector<double>& x) { return nuclear_norm(Matrix(4, 3, x)); };
    const auto fd = oracle::central_differences(f, std::vector<double>(m.entries().begin(), m.entries().end()), 1e-6);
    EXPECT_LT(oracle::relative_error(g.entries(), fd), 1e-5);
  }
}

TEST(NuclearSubgradient, DualPairingAndSpectralBound) {
  rng::SplitMix64 gen(23);
  for (int t = 0; t < 50; ++t) {
    const Matrix m = oracle::random_matrix(5, 3, gen);
    const Matrix g = nuclear_norm_subgradient(m);
    double pairing = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) pairing += g.entries()[k] * m.entries()[k];
    EXPECT_NEAR(pairing, nuclear_norm(m), 1e-10);
    EXPECT_NEAR(spectral_norm(g), 1.0, 1e-10);
  }
}

TEST(Cholesky, SolvesSpdSystems) {
  rng::SplitMix64 gen(31);
  const Matrix b = oracle::random_matrix(5, 5, gen);
  const Matrix spd = oracle::naive_product(b, b.transposed()) + Matrix::identity(5);
  const Matrix rhs = oracle::random_matrix(5, 2, gen);
  const Matrix x = solve_spd(spd, rhs);
  EXPECT_LT(oracle::max_abs_diff(oracle::naive_product(spd, x), rhs), 1e-12);
  const Matrix l = cholesky(spd);
  EXPECT_LT(oracle::max_abs_diff(oracle::naive_product(l, l.transposed()), spd), 1e-12);
  EXPECT_THROW(cholesky(Matrix{{1, 2}, {2, 1}}), NumericalError);
}
