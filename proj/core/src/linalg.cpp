#include "nudg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nudg/error.hpp"

namespace nudg {

namespace {

void require_shape(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw ValidationError("matrix dimensions must be at least 1x1");
  }
}

void require_finite(const Matrix& m, const char* op) {
  if (!m.all_finite()) {
    throw ValidationError(std::string(op) + ": matrix has non-finite entries");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError(std::string(op) + ": shape mismatch");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Column-major working copy; the Jacobi rotations act on whole columns.
struct Columns {
  std::size_t m;
  std::size_t n;
  std::vector<double> data;

  std::span<double> col(std::size_t j) { return {data.data() + j * m, m}; }
  std::span<const double> col(std::size_t j) const { return {data.data() + j * m, m}; }
};

// Fills column j of q with a unit vector orthogonal to columns [0, j) and to
// every column flagged in `filled`.
void complete_basis(Columns& q, std::size_t j, const std::vector<bool>& filled) {
  for (std::size_t e = 0; e < q.m; ++e) {
    auto v = q.col(j);
    std::fill(v.begin(), v.end(), 0.0);
    v[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < q.n; ++k) {
        if (k == j || !filled[k]) continue;
        const double p = dot(q.col(k), v);
        auto ck = q.col(k);
        for (std::size_t i = 0; i < q.m; ++i) v[i] -= p * ck[i];
      }
    }
    const double norm = std::sqrt(dot(v, v));
    if (norm > 0.5) {
      for (double& x : v) x /= norm;
      return;
    }
  }
  throw NumericalError("svd: failed to complete orthonormal basis");
}

// Requires m >= n.
SvdResult jacobi_tall(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();

  Columns w{m, n, std::vector<double>(m * n)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) w.data[j * m + i] = a(i, j);
  }
  Columns v{n, n, std::vector<double>(n * n, 0.0)};
  for (std::size_t j = 0; j < n; ++j) v.data[j * n + j] = 1.0;

  int sweep = 0;
  bool converged = (n == 1);
  while (!converged) {
    if (sweep == kJacobiMaxSweeps) {
      throw NumericalError("svd: Jacobi iteration did not converge in " +
                           std::to_string(kJacobiMaxSweeps) + " sweeps");
    }
    ++sweep;
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto cp = w.col(p);
        auto cq = w.col(q);
        const double alpha = dot(cp, cp);
        const double beta = dot(cq, cq);
        const double gamma = dot(cp, cq);
        if (gamma == 0.0 || std::abs(gamma) <= kJacobiTolerance * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = cp[i];
          const double y = cq[i];
          cp[i] = c * x - s * y;
          cq[i] = s * x + c * y;
        }
        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i];
          const double y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    converged = !rotated;
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = std::sqrt(dot(w.col(j), w.col(j)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  const double largest = norms[order[0]];
  const double tiny = largest * std::numeric_limits<double>::epsilon() * static_cast<double>(m);

  Columns u{m, n, std::vector<double>(m * n, 0.0)};
  std::vector<bool> filled(n, false);
  std::vector<double> sigma(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    sigma[k] = norms[j];
    if (norms[j] > tiny && norms[j] > 0.0) {
      auto src = w.col(j);
      auto dst = u.col(k);
      for (std::size_t i = 0; i < m; ++i) dst[i] = src[i] / norms[j];
      filled[k] = true;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!filled[k]) {
      complete_basis(u, k, filled);
      filled[k] = true;
    }
  }

  Matrix u_out(m, n);
  for (std::size_t k = 0; k < n; ++k) {
    auto src = u.col(k);
    for (std::size_t i = 0; i < m; ++i) u_out(i, k) = src[i];
  }
  Matrix vt_out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    auto src = v.col(order[k]);
    for (std::size_t i = 0; i < n; ++i) vt_out(k, i) = src[i];
  }
  return SvdResult{std::move(u_out), std::move(sigma), std::move(vt_out), sweep};
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_((require_shape(rows, cols), rows * cols), fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  require_shape(rows, cols);
  if (entries_.size() != rows * cols) {
    throw ValidationError("matrix entries length must equal rows * cols");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  require_shape(rows_, cols_);
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ValidationError("ragged matrix initializer");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), [](double x) { return std::isfinite(x); });
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ValidationError("matrix product: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix transpose_times(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ValidationError("transpose_times: row count mismatch");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ak = a.row(k);
    auto bk = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      auto ci = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "matrix sum");
  Matrix c = a;
  auto ce = c.entries();
  auto be = b.entries();
  for (std::size_t i = 0; i < ce.size(); ++i) ce[i] += be[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "matrix difference");
  Matrix c = a;
  auto ce = c.entries();
  auto be = b.entries();
  for (std::size_t i = 0; i < ce.size(); ++i) ce[i] -= be[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& x : c.entries()) x *= s;
  return c;
}

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd");
  if (m.rows() >= m.cols()) return jacobi_tall(m);
  SvdResult t = jacobi_tall(m.transposed());
  return SvdResult{t.vt.transposed(), std::move(t.sigma), t.u.transposed(), t.sweeps};
}

std::vector<double> singular_values(const Matrix& m) { return svd(m).sigma; }

double nuclear_norm(const Matrix& m) {
  const auto sigma = singular_values(m);
  return std::accumulate(sigma.begin(), sigma.end(), 0.0);
}

double spectral_norm(const Matrix& m) { return singular_values(m).front(); }

double frobenius_norm(const Matrix& m) {
  require_finite(m, "frobenius_norm");
  double scale = 0.0;
  for (double x : m.entries()) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : m.entries()) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

double stable_rank(const Matrix& m) {
  const auto sigma = singular_values(m);
  if (sigma.front() == 0.0) {
    throw NumericalError("stable_rank: undefined for the zero matrix");
  }
  double s = 0.0;
  for (double x : sigma) {
    const double y = x / sigma.front();
    s += y * y;
  }
  return s;
}

std::size_t numeric_rank(const Matrix& m) {
  const auto sigma = singular_values(m);
  const double cut = kRankEpsilon * sigma.front();
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [&](double x) { return x > cut && x > 0.0; }));
}

Matrix nuclear_norm_subgradient(const SvdResult& s) {
  const std::size_t rows = s.u.rows();
  const std::size_t cols = s.vt.cols();
  Matrix g(rows, cols);
  const double cut = kRankEpsilon * s.sigma.front();
  for (std::size_t k = 0; k < s.sigma.size(); ++k) {
    if (!(s.sigma[k] > cut) || s.sigma[k] == 0.0) break;
    auto vk = s.vt.row(k);
    for (std::size_t i = 0; i < rows; ++i) {
      const double uik = s.u(i, k);
      auto gi = g.row(i);
      for (std::size_t j = 0; j < cols; ++j) gi[j] += uik * vk[j];
    }
  }
  return g;
}

Matrix nuclear_norm_subgradient(const Matrix& m) { return nuclear_norm_subgradient(svd(m)); }

Matrix cholesky(const Matrix& spd) {
  if (spd.rows() != spd.cols()) throw ValidationError("cholesky: matrix must be square");
  require_finite(spd, "cholesky");
  const std::size_t n = spd.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw NumericalError("cholesky: matrix is not positive definite");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix solve_spd(const Matrix& spd, const Matrix& rhs) {
  if (rhs.rows() != spd.rows()) throw ValidationError("solve_spd: right-hand side row mismatch");
  const Matrix l = cholesky(spd);
  const std::size_t n = l.rows();
  Matrix x = rhs;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

}  // namespace nudg
