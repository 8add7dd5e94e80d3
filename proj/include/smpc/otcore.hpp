#pragma once

// Entropic optimal transport in the linear (non-log) domain.
//
// Kernels, scalings and couplings use extended precision. With eps around
// 1e-3 of the cost scale the kernel entries reach exp(-1000), which is below
// the double range but well inside the x87 80-bit range.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "smpc/error.hpp"

namespace smpc::ot {

using Real = long double;
using RealVector = std::vector<Real>;

class CostMatrix {
 public:
  CostMatrix() = default;
  /// Row-major; every entry must be finite and >= 0.
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return c_[i * cols_ + j]; }
  std::span<const double> entries() const noexcept { return c_; }
  double max() const noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> c_;
};

class GibbsKernel {
 public:
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double epsilon() const noexcept { return epsilon_; }
  Real operator()(std::size_t i, std::size_t j) const { return k_[i * cols_ + j]; }
  std::span<const Real> entries() const noexcept { return k_; }

  /// K v
  RealVector apply(std::span<const Real> v) const;
  /// K^T v
  RealVector apply_transpose(std::span<const Real> v) const;

 private:
  friend GibbsKernel gibbs_kernel(const CostMatrix&, double);
  friend GibbsKernel kernel_from_entries(std::size_t, std::size_t, std::vector<Real>, double);
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> k_;
  double epsilon_ = 1.0;
};

struct Marginals {
  RealVector a;
  RealVector b;

  static Marginals uniform(std::size_t n, std::size_t m);
  /// Nonnegative entries, each vector summing to 1 within 1e-12.
  void validate() const;
};

struct ScalingPair {
  RealVector alpha;
  RealVector beta;
};

struct Coupling {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Real> p;
  ScalingPair scaling;
  double epsilon = 0.0;

  Real operator()(std::size_t i, std::size_t j) const { return p[i * cols + j]; }
  RealVector row_sums() const;
  RealVector col_sums() const;
};

struct FixedCount {
  long iterations = 1;
};

struct MarginalTolerance {
  double threshold = 0.005;
  long cap = 100'000;
};

using StoppingPolicy = std::variant<FixedCount, MarginalTolerance>;

struct SinkhornResult {
  Coupling coupling;
  long iterations = 0;
  Real violation = 0;
};

/// Tolerance not reached within the cap. Carries the lowest-violation iterate.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, SinkhornResult best)
      : Error(ErrorKind::NonConvergence, message), best_(std::move(best)) {}
  const SinkhornResult& best() const noexcept { return best_; }

 private:
  SinkhornResult best_;
};

/// K_ij = exp(-C_ij / eps). Throws DegenerateKernelError if any entry
/// underflows to zero.
GibbsKernel gibbs_kernel(const CostMatrix& c, double epsilon);

/// Kernel from precomputed positive entries (tests and diagnostics).
GibbsKernel kernel_from_entries(std::size_t rows, std::size_t cols, std::vector<Real> k,
                                double epsilon);

/// beta = b / (K^T alpha_in), then alpha_out = a / (K beta).
ScalingPair sinkhorn_step(const GibbsKernel& k, const Marginals& m,
                          std::span<const Real> alpha_in);

/// Runs sinkhorn_step from alpha0 until the stopping policy is met. The
/// returned coupling pairs the last alpha with the beta that produced it, so
/// its row sums match a.
SinkhornResult sinkhorn_solve(const GibbsKernel& k, const Marginals& m,
                              std::span<const Real> alpha0, const StoppingPolicy& stop);

Coupling coupling_from(const GibbsKernel& k, const ScalingPair& s);

/// ||P 1 - a||_1 + ||P^T 1 - b||_1
Real marginal_violation(const Coupling& p, const Marginals& m);

/// log( max_i(x_i/y_i) / min_i(x_i/y_i) )
Real hilbert_metric(std::span<const Real> x, std::span<const Real> y);

/// lambda(K) = (sqrt(eta) - 1) / (sqrt(eta) + 1) where eta is the largest
/// cross ratio K_ik K_jl / (K_jk K_il). O(N^2 M); meant for small problems.
Real contraction_factor(const GibbsKernel& k);

/// H(P) = -sum P (log P - 1), with 0 log 0 = 0.
Real entropy(const Coupling& p);

}  // namespace smpc::ot
