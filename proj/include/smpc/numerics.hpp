#pragma once

// Small dense linear algebra: the matrices in this project are at most a
// handful of rows, so everything is row-major std::vector storage.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace smpc {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of row-major entries; throws if the size does not match
  /// or an entry is not finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> entries() const noexcept { return data_; }

  Matrix transpose() const;
  /// Copy of the block starting at (r0, c0).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const;

  Vector apply(std::span<const double> x) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double norm2(std::span<const double> v);
/// x^T M x for square M.
double quadratic_form(const Matrix& m, std::span<const double> x);

/// A^k by repeated multiplication; A^0 is the identity.
Matrix mat_power(const Matrix& a, unsigned k);

/// LU with partial pivoting. Throws NumericalError(Invertibility) when a pivot
/// vanishes relative to the matrix scale.
Matrix inverse(const Matrix& a);

/// Lower Cholesky factor of a symmetric positive definite matrix.
Matrix cholesky(const Matrix& spd);
Matrix spd_inverse(const Matrix& spd);

/// Eigenvalues of a symmetric matrix, ascending.
std::vector<double> symmetric_eigenvalues(const Matrix& a);

/// Induced 2-norm (largest singular value).
double spectral_norm(const Matrix& a);

/// max |lambda|. Closed form up to 2x2, Schur iteration above that with a
/// 10'000 iteration cap (EigenNonConvergence on failure).
double spectral_radius(const Matrix& a);

/// Scaling and squaring with a degree-13 Pade approximant.
Matrix matrix_exponential(const Matrix& a);

/// integral_0^T e^{At} B B^T e^{A^T t} dt via the block-exponential identity.
Matrix continuous_gramian(const Matrix& a, const Matrix& b, double horizon);

}  // namespace smpc
