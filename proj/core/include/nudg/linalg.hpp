#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nudg {

/// Dense real matrix, row-major. Always at least 1x1.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return entries_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {entries_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {entries_.data() + i * cols_, cols_}; }

  std::span<double> entries() noexcept { return entries_; }
  std::span<const double> entries() const noexcept { return entries_; }

  bool all_finite() const noexcept;
  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

/// a^T * b without forming the transpose.
Matrix transpose_times(const Matrix& a, const Matrix& b);

/// Thin SVD, k = min(m, n). sigma is non-increasing and non-negative; signs live in u.
struct SvdResult {
  Matrix u;                    // m x k, orthonormal columns
  std::vector<double> sigma;   // k
  Matrix vt;                   // k x n, orthonormal rows
  int sweeps = 0;
};

/// Singular values below kRankEpsilon * sigma[0] count as zero.
inline constexpr double kRankEpsilon = 1e-10;
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kJacobiTolerance = 1e-12;

/// One-sided (Hestenes) Jacobi SVD. Throws NumericalError if it fails to
/// converge within kJacobiMaxSweeps, ValidationError on non-finite input.
SvdResult svd(const Matrix& m);

std::vector<double> singular_values(const Matrix& m);

double nuclear_norm(const Matrix& m);
double spectral_norm(const Matrix& m);
double frobenius_norm(const Matrix& m);

/// ||M||_F^2 / ||M||_2^2. Throws NumericalError for the zero matrix.
double stable_rank(const Matrix& m);

std::size_t numeric_rank(const Matrix& m);

/// U_r V_r^T over the singular triples above the rank threshold; this is the
/// minimal-norm element of the subdifferential of the nuclear norm.
Matrix nuclear_norm_subgradient(const Matrix& m);

/// Same, from an already computed decomposition.
Matrix nuclear_norm_subgradient(const SvdResult& s);

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
Matrix cholesky(const Matrix& spd);

/// Solves spd * X = rhs for X.
Matrix solve_spd(const Matrix& spd, const Matrix& rhs);

}  // namespace nudg
