#include "smpc/otcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace smpc::ot {

namespace {

void check_finite_positive(Real v, const char* what, std::size_t index) {
  if (!(v > 0) || !std::isfinite(v)) {
    throw NumericalError(std::string("sinkhorn: ") + what + " entry " + std::to_string(index) +
                             " is zero or non-finite",
                         ErrorKind::NumericalBreakdown);
  }
}

void require_marginal_shapes(const GibbsKernel& k, const Marginals& m) {
  if (m.a.size() != k.rows() || m.b.size() != k.cols()) {
    throw DimensionError("marginals " + std::to_string(m.a.size()) + "/" +
                         std::to_string(m.b.size()) + " do not match kernel " +
                         std::to_string(k.rows()) + "x" + std::to_string(k.cols()));
  }
}

Real l1_gap(std::span<const Real> x, std::span<const Real> target) {
  Real s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::fabs(x[i] - target[i]);
  return s;
}

}  // namespace

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), c_(std::move(entries)) {
  if (c_.size() != rows_ * cols_) {
    throw DimensionError("cost matrix: expected " + std::to_string(rows_ * cols_) +
                         " entries, got " + std::to_string(c_.size()));
  }
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (!std::isfinite(c_[i]) || c_[i] < 0.0) {
      throw DomainError("cost matrix entry (" + std::to_string(i / std::max<std::size_t>(cols_, 1)) +
                        "," + std::to_string(i % std::max<std::size_t>(cols_, 1)) +
                        ") must be finite and nonnegative");
    }
  }
}

double CostMatrix::max() const noexcept {
  double m = 0.0;
  for (double v : c_) m = std::max(m, v);
  return m;
}

RealVector GibbsKernel::apply(std::span<const Real> v) const {
  if (v.size() != cols_) throw DimensionError("kernel apply: length mismatch");
  RealVector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    const Real* row = k_.data() + i * cols_;
    Real s = 0;
    for (std::size_t j = 0; j < cols_; ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return out;
}

RealVector GibbsKernel::apply_transpose(std::span<const Real> v) const {
  if (v.size() != rows_) throw DimensionError("kernel apply_transpose: length mismatch");
  RealVector out(cols_, 0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const Real* row = k_.data() + i * cols_;
    const Real vi = v[i];
    for (std::size_t j = 0; j < cols_; ++j) out[j] += row[j] * vi;
  }
  return out;
}

Marginals Marginals::uniform(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw DimensionError("uniform marginals need positive sizes");
  return {RealVector(n, Real(1) / n), RealVector(m, Real(1) / m)};
}

void Marginals::validate() const {
  auto check = [](const RealVector& v, const char* name) {
    if (v.empty()) throw DimensionError(std::string("marginal ") + name + " is empty");
    Real s = 0;
    for (Real x : v) {
      if (!(x >= 0) || !std::isfinite(x)) {
        throw DomainError(std::string("marginal ") + name + " has a negative or non-finite entry");
      }
      s += x;
    }
    if (std::fabs(s - 1) > 1e-12L) {
      throw DomainError(std::string("marginal ") + name + " does not sum to 1");
    }
  };
  check(a, "a");
  check(b, "b");
}

RealVector Coupling::row_sums() const {
  RealVector r(rows, 0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) r[i] += p[i * cols + j];
  return r;
}

RealVector Coupling::col_sums() const {
  RealVector c(cols, 0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) c[j] += p[i * cols + j];
  return c;
}

GibbsKernel gibbs_kernel(const CostMatrix& c, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ParameterError("epsilon must be positive and finite");
  }
  GibbsKernel k;
  k.rows_ = c.rows();
  k.cols_ = c.cols();
  k.epsilon_ = epsilon;
  k.k_.resize(c.rows() * c.cols());
  const Real eps = epsilon;
  for (std::size_t i = 0; i < c.rows(); ++i) {
    for (std::size_t j = 0; j < c.cols(); ++j) {
      const Real v = std::exp(-static_cast<Real>(c(i, j)) / eps);
      if (v == 0) throw DegenerateKernelError(i, j, c(i, j), epsilon);
      k.k_[i * c.cols() + j] = v;
    }
  }
  return k;
}

GibbsKernel kernel_from_entries(std::size_t rows, std::size_t cols, std::vector<Real> entries,
                                double epsilon) {
  if (entries.size() != rows * cols) throw DimensionError("kernel entries: size mismatch");
  for (Real v : entries)
    if (!(v > 0) || !std::isfinite(v)) throw DomainError("kernel entries must be positive");
  GibbsKernel k;
  k.rows_ = rows;
  k.cols_ = cols;
  k.k_ = std::move(entries);
  k.epsilon_ = epsilon;
  return k;
}

ScalingPair sinkhorn_step(const GibbsKernel& k, const Marginals& m,
                          std::span<const Real> alpha_in) {
  require_marginal_shapes(k, m);
  if (alpha_in.size() != k.rows()) throw DimensionError("alpha length does not match kernel");
  for (std::size_t i = 0; i < alpha_in.size(); ++i) check_finite_positive(alpha_in[i], "alpha", i);

  ScalingPair s;
  s.beta = k.apply_transpose(alpha_in);
  for (std::size_t j = 0; j < s.beta.size(); ++j) {
    check_finite_positive(s.beta[j], "K^T alpha", j);
    s.beta[j] = m.b[j] / s.beta[j];
  }
  s.alpha = k.apply(s.beta);
  for (std::size_t i = 0; i < s.alpha.size(); ++i) {
    check_finite_positive(s.alpha[i], "K beta", i);
    s.alpha[i] = m.a[i] / s.alpha[i];
  }
  return s;
}

SinkhornResult sinkhorn_solve(const GibbsKernel& k, const Marginals& m,
                              std::span<const Real> alpha0, const StoppingPolicy& stop) {
  require_marginal_shapes(k, m);
  if (alpha0.size() != k.rows()) throw DimensionError("alpha0 length does not match kernel");
  for (std::size_t i = 0; i < alpha0.size(); ++i) {
    if (!(alpha0[i] > 0) || !std::isfinite(alpha0[i])) {
      throw DomainError("alpha0 entries must be positive and finite");
    }
  }

  long limit = 0;
  double threshold = -1.0;
  if (const auto* f = std::get_if<FixedCount>(&stop)) {
    if (f->iterations < 1) throw ParameterError("fixed iteration count must be >= 1");
    limit = f->iterations;
  } else {
    const auto& t = std::get<MarginalTolerance>(stop);
    if (!(t.threshold > 0.0)) throw ParameterError("tolerance threshold must be positive");
    if (t.cap < 1) throw ParameterError("iteration cap must be >= 1");
    limit = t.cap;
    threshold = t.threshold;
  }

  const std::size_t n = k.rows();
  const std::size_t mm = k.cols();
  RealVector alpha(alpha0.begin(), alpha0.end());
  RealVector kt_alpha = k.apply_transpose(alpha);
  RealVector beta(mm);
  RealVector k_beta;

  ScalingPair best;
  Real best_violation = std::numeric_limits<Real>::infinity();
  long best_iter = 0;
  Real violation = 0;

  for (long it = 1; it <= limit; ++it) {
    for (std::size_t j = 0; j < mm; ++j) {
      check_finite_positive(kt_alpha[j], "K^T alpha", j);
      beta[j] = m.b[j] / kt_alpha[j];
    }
    k_beta = k.apply(beta);
    for (std::size_t i = 0; i < n; ++i) {
      check_finite_positive(k_beta[i], "K beta", i);
      alpha[i] = m.a[i] / k_beta[i];
    }
    // Marginals of diag(alpha) K diag(beta) from the products we already have;
    // K^T alpha is reused by the next beta update.
    kt_alpha = k.apply_transpose(alpha);
    violation = 0;
    for (std::size_t i = 0; i < n; ++i) violation += std::fabs(alpha[i] * k_beta[i] - m.a[i]);
    for (std::size_t j = 0; j < mm; ++j) violation += std::fabs(beta[j] * kt_alpha[j] - m.b[j]);

    if (threshold < 0.0) {
      if (it == limit) {
        ScalingPair s{alpha, beta};
        return {coupling_from(k, s), it, violation};
      }
      continue;
    }
    if (violation < threshold) {
      ScalingPair s{alpha, beta};
      return {coupling_from(k, s), it, violation};
    }
    if (violation < best_violation) {
      best_violation = violation;
      best = ScalingPair{alpha, beta};
      best_iter = it;
    }
  }

  SinkhornResult r{coupling_from(k, best), best_iter, best_violation};
  char buf[128];
  std::snprintf(buf, sizeof buf, "sinkhorn: marginal violation %.3g above threshold %.3g after %ld iterations",
                static_cast<double>(best_violation), threshold, limit);
  throw NonConvergenceError(buf, std::move(r));
}

Coupling coupling_from(const GibbsKernel& k, const ScalingPair& s) {
  if (s.alpha.size() != k.rows() || s.beta.size() != k.cols()) {
    throw DimensionError("scaling pair does not match kernel");
  }
  Coupling c;
  c.rows = k.rows();
  c.cols = k.cols();
  c.scaling = s;
  c.epsilon = k.epsilon();
  c.p.resize(c.rows * c.cols);
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j)
      c.p[i * c.cols + j] = s.alpha[i] * k(i, j) * s.beta[j];
  return c;
}

Real marginal_violation(const Coupling& p, const Marginals& m) {
  if (m.a.size() != p.rows || m.b.size() != p.cols) {
    throw DimensionError("marginals do not match coupling");
  }
  return l1_gap(p.row_sums(), m.a) + l1_gap(p.col_sums(), m.b);
}

Real hilbert_metric(std::span<const Real> x, std::span<const Real> y) {
  if (x.size() != y.size() || x.empty()) {
    throw DimensionError("hilbert_metric: vectors must be non-empty and of equal length");
  }
  Real lo = std::numeric_limits<Real>::infinity();
  Real hi = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw DomainError("hilbert_metric: entries must be positive and finite");
    }
    const Real r = x[i] / y[i];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return std::log(hi / lo);
}

Real contraction_factor(const GibbsKernel& k) {
  const std::size_t n = k.rows();
  const std::size_t m = k.cols();
  std::vector<Real> logk(n * m);
  for (std::size_t idx = 0; idx < logk.size(); ++idx) logk[idx] = std::log(k.entries()[idx]);

  // log eta = max over row pairs of (max_k r_k - min_k r_k), r_k = logK_ik - logK_jk
  Real log_eta = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Real lo = std::numeric_limits<Real>::infinity();
      Real hi = -lo;
      for (std::size_t c = 0; c < m; ++c) {
        const Real r = logk[i * m + c] - logk[j * m + c];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      log_eta = std::max(log_eta, hi - lo);
    }
  }
  return std::tanh(log_eta / 4);
}

Real entropy(const Coupling& p) {
  Real h = 0;
  for (Real v : p.p)
    if (v > 0) h -= v * (std::log(v) - 1);
  return h;
}

}  // namespace smpc::ot
