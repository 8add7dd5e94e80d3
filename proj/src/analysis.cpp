#include "smpc/analysis.hpp"

#include <cmath>
#include <string>

namespace smpc::analysis {

namespace {

ot::SinkhornResult tight_solve(const FleetModel& model, const ot::GibbsKernel& k, double theta,
                               std::span<const ot::Real> alpha_init) {
  const auto& m = model.scenario().marginals;
  ot::RealVector ones;
  if (alpha_init.empty()) {
    ones.assign(k.rows(), 1);
    alpha_init = ones;
  }
  return ot::sinkhorn_solve(k, m, alpha_init, ot::MarginalTolerance{theta, 1'000'000});
}

}  // namespace

double entropic_cost_at(const ot::CostMatrix& c, const ot::Coupling& p) {
  ot::Real transport = 0;
  for (std::size_t i = 0; i < p.rows; ++i)
    for (std::size_t j = 0; j < p.cols; ++j) transport += c(i, j) * p(i, j);
  return static_cast<double>(transport - static_cast<ot::Real>(p.epsilon) * ot::entropy(p));
}

EntropicCost entropic_cost(const FleetModel& model, const FleetState& x, double theta,
                           std::span<const ot::Real> alpha_init) {
  const ot::CostMatrix c = model.cost_matrix(x);
  const ot::GibbsKernel k = ot::gibbs_kernel(c, model.scenario().epsilon);
  auto r = tight_solve(model, k, theta, alpha_init);
  EntropicCost out;
  out.value = entropic_cost_at(c, r.coupling);
  out.iterations = r.iterations;
  out.coupling = std::move(r.coupling);
  return out;
}

FleetState entropic_cost_gradient(const FleetModel& model, const FleetState& x, double theta) {
  const auto e = entropic_cost(model, x, theta);
  const auto& targets = model.scenario().targets;
  const std::size_t dim = model.scenario().state_dim();
  FleetState grad(x.size(), Vector(dim, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<ot::Real> acc(dim, 0);
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const ot::Real w = e.coupling(i, j);
      for (std::size_t d = 0; d < dim; ++d) acc[d] += w * (x[i][d] - targets[j][d]);
    }
    Vector v(dim);
    for (std::size_t d = 0; d < dim; ++d) v[d] = static_cast<double>(acc[d]);
    const Vector gv = model.law(i).Gcal.apply(v);
    for (std::size_t d = 0; d < dim; ++d) grad[i][d] = 2.0 * gv[d];
  }
  return grad;
}

EquilibriumReport equilibrium_residual_at(const FleetModel& model, const FleetState& x,
                                          const ot::Coupling& p) {
  const auto& sc = model.scenario();
  const auto tmp = barycentric_targets(p, sc.targets, sc.marginals.a);
  EquilibriumReport rep;
  rep.per_agent.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < x[i].size(); ++d) s += (x[i][d] - tmp[i][d]) * (x[i][d] - tmp[i][d]);
    rep.per_agent[i] = std::sqrt(s);
    rep.residual = std::max(rep.residual, rep.per_agent[i]);
  }
  rep.coupling = p;
  rep.epsilon = p.epsilon;
  return rep;
}

EquilibriumReport equilibrium_residual(const FleetModel& model, const FleetState& x, double theta,
                                       std::span<const ot::Real> alpha_init) {
  const auto k = model.kernel_at(x);
  const auto r = tight_solve(model, k, theta, alpha_init);
  return equilibrium_residual_at(model, x, r.coupling);
}

Anchor make_anchor(const FleetModel& model, const FleetState& xe, double theta) {
  const auto k = model.kernel_at(xe);
  auto r = tight_solve(model, k, theta, {});
  Anchor a;
  a.x = xe;
  a.beta = r.coupling.scaling.beta;
  a.coupling = std::move(r.coupling);
  return a;
}

double lyapunov_V(const FleetModel& model, const FleetState& x, std::span<const ot::Real> beta,
                  const Anchor& anchor, double gamma) {
  const auto& sc = model.scenario();
  const auto tmp = barycentric_targets(anchor.coupling, sc.targets, sc.marginals.a);
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) v += mpc::mpc_cost(model.law(i), x[i], tmp[i]);
  return v + gamma * static_cast<double>(ot::hilbert_metric(beta, anchor.beta));
}

long settling_index(const AgentBound& b, double initial_norm, double delta) {
  if (!(delta > 0.0)) throw ParameterError("settling delta must be positive");
  const double rate = b.rho + b.nu;
  long k = 0;
  double v = b.kappa * initial_norm;
  while (!(v < delta)) {
    v *= rate;
    ++k;
    if (k > 100'000'000) throw NumericalError("settling index did not resolve");
  }
  return k;
}

BoundReport ultimate_bound(const FleetModel& model, std::span<const double> nu) {
  const std::size_t n = model.agents();
  if (!nu.empty() && nu.size() != n) throw DimensionError("one margin per agent expected");
  BoundReport rep;
  for (const auto& t : model.scenario().targets) rep.r_bar = std::max(rep.r_bar, norm2(t));

  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& abar = model.law(i).Abar;
    AgentBound b;
    b.rho = spectral_radius(abar);
    b.nu = nu.empty() ? 0.5 * (1.0 - b.rho) : nu[i];
    const double rate = b.rho + b.nu;
    if (!(b.nu > 0.0) || !(rate < 1.0)) {
      throw ParameterError("agent " + std::to_string(i) + ": need nu > 0 and rho + nu < 1 (rho = " +
                           format_number(b.rho) + ")");
    }
    if (i > 0 && abar == model.law(i - 1).Abar && (nu.empty() || nu[i] == nu[i - 1])) {
      rep.agents.push_back(rep.agents.back());
      continue;
    }
    // Scan |Abar^r| / rate^r until some m >= 1 has ratio <= 1. Then every
    // k = q m + r satisfies |Abar^k| <= kappa rate^k with kappa the max over r < m.
    Matrix power = Matrix::identity(abar.rows());
    double scale = 1.0;
    b.kappa = 1.0;
    for (long r = 1;; ++r) {
      power = power * abar;
      scale *= rate;
      const double ratio = spectral_norm(power) / scale;
      if (ratio <= 1.0) break;
      b.kappa = std::max(b.kappa, ratio);
      if (r > 1'000'000) throw NumericalError("kappa search did not terminate");
    }
    const Matrix i_minus = Matrix::identity(abar.rows()) - abar;
    b.bound = b.kappa * rep.r_bar * spectral_norm(i_minus) / (1.0 - rate);
    rep.agents.push_back(b);
  }
  return rep;
}

std::vector<double> trajectory_envelope(const Matrix& abar, double initial_norm, double r_bar,
                                        long steps) {
  std::vector<double> env(static_cast<std::size_t>(steps + 1));
  const double drive = r_bar * spectral_norm(Matrix::identity(abar.rows()) - abar);
  Matrix power = Matrix::identity(abar.rows());  // Abar^k
  double sum = 0.0;
  for (long k = 0; k <= steps; ++k) {
    const double pk = spectral_norm(power);
    env[static_cast<std::size_t>(k)] = pk * initial_norm + sum;
    sum += pk * drive;  // term s = k + 1 uses |Abar^k|
    power = power * abar;
  }
  return env;
}

DualObjective dual_objective(std::span<const ot::Real> f, std::span<const ot::Real> g,
                             const FleetModel& model, const FleetState& x) {
  const auto k = model.kernel_at(x);
  const auto& m = model.scenario().marginals;
  if (f.size() != k.rows() || g.size() != k.cols()) throw DimensionError("dual vector lengths");
  const ot::Real eps = model.scenario().epsilon;
  ot::RealVector ef(f.size()), eg(g.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    ef[i] = std::exp(f[i] / eps);
    if (!std::isfinite(ef[i])) throw NumericalError("dual objective: exp(f/eps) overflowed");
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    eg[j] = std::exp(g[j] / eps);
    if (!std::isfinite(eg[j])) throw NumericalError("dual objective: exp(g/eps) overflowed");
  }
  const auto keg = k.apply(eg);
  const auto ktef = k.apply_transpose(ef);
  ot::Real lin = 0, mass = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    lin += f[i] * m.a[i];
    mass += ef[i] * keg[i];
  }
  for (std::size_t j = 0; j < g.size(); ++j) lin += g[j] * m.b[j];

  DualObjective q;
  q.value = static_cast<double>(lin - eps * mass);
  q.grad_f.resize(f.size());
  q.grad_g.resize(g.size());
  for (std::size_t i = 0; i < f.size(); ++i) q.grad_f[i] = m.a[i] - ef[i] * keg[i];
  for (std::size_t j = 0; j < g.size(); ++j) q.grad_g[j] = m.b[j] - eg[j] * ktef[j];
  return q;
}

std::pair<ot::RealVector, ot::RealVector> duals_of(const ot::Coupling& p) {
  const ot::Real eps = p.epsilon;
  ot::RealVector f(p.scaling.alpha.size()), g(p.scaling.beta.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = eps * std::log(p.scaling.alpha[i]);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = eps * std::log(p.scaling.beta[j]);
  return {f, g};
}

}  // namespace smpc::analysis
