#include "smpc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "smpc/error.hpp"

namespace smpc {

namespace {

void require_square(const Matrix& a, const char* what) {
  if (!a.is_square()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  }
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) m(r, c) = a(r, c);
  return m;
}

double norm1(const Matrix& a) {
  double best = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) s += std::abs(a(r, c));
    best = std::max(best, s);
  }
  return best;
}

// Solves A X = B by LU with partial pivoting.
Matrix lu_solve(Matrix a, Matrix b) {
  const std::size_t n = a.rows();
  const double scale = std::max(max_abs(a), 1e-300);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a(r, k)) > std::abs(a(piv, k))) piv = r;
    if (std::abs(a(piv, k)) <= 1e-14 * scale) {
      throw NumericalError("matrix is singular to working precision", ErrorKind::Invertibility);
    }
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
      for (std::size_t c = 0; c < b.cols(); ++c) std::swap(b(k, c), b(piv, c));
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a(r, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
      for (std::size_t c = 0; c < b.cols(); ++c) b(r, c) -= f * b(k, c);
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t c = 0; c < b.cols(); ++c) {
      double s = b(kk, c);
      for (std::size_t j = kk + 1; j < n; ++j) s -= a(kk, j) * b(j, c);
      b(kk, c) = s / a(kk, kk);
    }
  }
  return b;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix entries: expected " + std::to_string(rows_ * cols_) +
                         " values, got " + std::to_string(data_.size()));
  }
  for (double v : data_)
    if (!std::isfinite(v)) throw DomainError("matrix entries must be finite");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DimensionError("ragged matrix initializer");
    for (double v : row) {
      if (!std::isfinite(v)) throw DomainError("matrix entries must be finite");
      data_.push_back(v);
    }
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const {
  if (r0 + rows > rows_ || c0 + cols > cols_) throw DimensionError("block out of range");
  Matrix b(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
  return b;
}

Vector Matrix::apply(std::span<const double> x) const {
  if (x.size() != cols_) {
    throw DimensionError("matrix-vector product: vector length " + std::to_string(x.size()) +
                         " vs " + std::to_string(cols_) + " columns");
  }
  Vector y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    const double* row = data_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "matrix sum");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "matrix difference");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(double s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matrix product: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double ark = a(r, k);
      if (ark == 0.0) continue;
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += ark * b(k, c);
    }
  return out;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.entries()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.entries()) m = std::max(m, std::abs(v));
  return m;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double quadratic_form(const Matrix& m, std::span<const double> x) {
  require_square(m, "quadratic form");
  if (x.size() != m.rows()) throw DimensionError("quadratic form: vector length mismatch");
  double s = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) row += m(r, c) * x[c];
    s += x[r] * row;
  }
  return s;
}

Matrix mat_power(const Matrix& a, unsigned k) {
  require_square(a, "mat_power");
  Matrix out = Matrix::identity(a.rows());
  for (unsigned i = 0; i < k; ++i) out = out * a;
  return out;
}

Matrix inverse(const Matrix& a) {
  require_square(a, "inverse");
  return lu_solve(a, Matrix::identity(a.rows()));
}

Matrix cholesky(const Matrix& spd) {
  require_square(spd, "cholesky");
  const std::size_t n = spd.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw NumericalError("matrix is not positive definite", ErrorKind::Invertibility);
    }
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Matrix spd_inverse(const Matrix& spd) {
  const Matrix l = cholesky(spd);
  const std::size_t n = l.rows();
  // L^{-1} by forward substitution, then (L L^T)^{-1} = L^{-T} L^{-1}.
  Matrix linv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = c; r < n; ++r) {
      double s = (r == c) ? 1.0 : 0.0;
      for (std::size_t k = c; k < r; ++k) s -= l(r, k) * linv(k, c);
      linv(r, c) = s / l(r, r);
    }
  }
  Matrix inv = linv.transpose() * linv;
  // exact symmetry
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) {
      const double m = 0.5 * (inv(r, c) + inv(c, r));
      inv(r, c) = m;
      inv(c, r) = m;
    }
  return inv;
}

std::vector<double> symmetric_eigenvalues(const Matrix& a) {
  require_square(a, "symmetric_eigenvalues");
  if (a.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(a), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigenvalue iteration did not converge");
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double spectral_norm(const Matrix& a) {
  if (a.empty()) return 0.0;
  const auto ev = symmetric_eigenvalues(a.transpose() * a);
  return std::sqrt(std::max(0.0, ev.back()));
}

double spectral_radius(const Matrix& a) {
  require_square(a, "spectral_radius");
  for (double v : a.entries())
    if (!std::isfinite(v)) throw DomainError("spectral_radius: non-finite entry");
  const std::size_t n = a.rows();
  if (n == 0) return 0.0;
  if (n == 1) return std::abs(a(0, 0));
  if (n == 2) {
    const double half_trace = 0.5 * (a(0, 0) + a(1, 1));
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    // discriminant written to avoid cancellation in tr^2/4 - det
    const double half_diff = 0.5 * (a(0, 0) - a(1, 1));
    const double disc = half_diff * half_diff + a(0, 1) * a(1, 0);
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      return std::max(std::abs(half_trace + root), std::abs(half_trace - root));
    }
    return std::sqrt(std::max(det, 0.0));
  }

  constexpr Eigen::Index kIterationCap = 10'000;
  Eigen::EigenSolver<Eigen::MatrixXd> solver;
  solver.setMaxIterations(kIterationCap);
  solver.compute(to_eigen(a), false);
  if (solver.info() != Eigen::Success) {
    // Gelfand estimate ||A^k||^{1/k} as the last available value.
    Matrix p = mat_power(a, 64);
    const double estimate = std::pow(spectral_norm(p), 1.0 / 64.0);
    throw EigenNonConvergence("spectral_radius: Schur iteration exceeded its cap", estimate);
  }
  double rho = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    rho = std::max(rho, std::abs(solver.eigenvalues()[i]));
  return rho;
}

Matrix matrix_exponential(const Matrix& a) {
  require_square(a, "matrix_exponential");
  const std::size_t n = a.rows();
  if (n == 0) return a;

  // Degree-13 Pade coefficients; theta_13 bounds ||A||_1 after scaling.
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double nrm = norm1(a);
  int squarings = 0;
  if (nrm > theta13) squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
  const Matrix as = a * std::ldexp(1.0, -squarings);

  const Matrix id = Matrix::identity(n);
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;

  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                         b[3] * a2 + b[1] * id;
  const Matrix u = as * u_inner;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                   b[2] * a2 + b[0] * id;

  Matrix r = lu_solve(v - u, v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

Matrix continuous_gramian(const Matrix& a, const Matrix& b, double horizon) {
  require_square(a, "continuous_gramian");
  if (b.rows() != a.rows()) throw DimensionError("continuous_gramian: B rows must match A");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ParameterError("continuous_gramian: horizon must be positive");
  }
  const std::size_t n = a.rows();
  const Matrix bbt = b * b.transpose();
  // [[-A, B B^T], [0, A^T]] * T; its exponential is [[., F12], [0, F22]] with
  // F22 = e^{A^T T} and G = F22^T F12.
  Matrix m(2 * n, 2 * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      m(r, c) = -a(r, c) * horizon;
      m(r, n + c) = bbt(r, c) * horizon;
      m(n + r, n + c) = a(c, r) * horizon;
    }
  const Matrix e = matrix_exponential(m);
  const Matrix f12 = e.block(0, n, n, n);
  const Matrix f22 = e.block(n, n, n, n);
  Matrix g = f22.transpose() * f12;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) {
      const double s = 0.5 * (g(r, c) + g(c, r));
      g(r, c) = s;
      g(c, r) = s;
    }
  return g;
}

}  // namespace smpc
