#include "smpc/mpc.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>

#include "smpc/error.hpp"

namespace smpc::mpc {

namespace {

void require_vector(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(v.size()));
  }
}

Vector difference(std::span<const double> x, std::span<const double> y) {
  Vector d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  return d;
}

// A finite double as sign * mantissa * 10^exponent, from its shortest
// round-trip decimal form.
struct Decimal {
  __int128 mantissa = 0;
  int exponent = 0;
};

Decimal to_decimal(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  Decimal d;
  bool negative = false;
  int frac_digits = 0;
  bool in_frac = false;
  const char* p = buf;
  if (*p == '-') {
    negative = true;
    ++p;
  }
  for (; p < res.ptr && *p != 'e'; ++p) {
    if (*p == '.') {
      in_frac = true;
      continue;
    }
    d.mantissa = d.mantissa * 10 + (*p - '0');
    if (in_frac) ++frac_digits;
  }
  int e = 0;
  if (p < res.ptr && *p == 'e') e = std::atoi(p + 1);
  d.exponent = e - frac_digits;
  if (negative) d.mantissa = -d.mantissa;
  return d;
}

std::optional<Decimal> multiply(Decimal a, Decimal b) {
  Decimal r;
  if (__builtin_mul_overflow(a.mantissa, b.mantissa, &r.mantissa)) return std::nullopt;
  r.exponent = a.exponent + b.exponent;
  return r;
}

std::optional<Decimal> add(Decimal a, Decimal b) {
  if (a.exponent < b.exponent) std::swap(a, b);
  // scale a down to b's exponent
  while (a.exponent > b.exponent) {
    if (__builtin_mul_overflow(a.mantissa, __int128{10}, &a.mantissa)) return std::nullopt;
    --a.exponent;
  }
  Decimal r;
  if (__builtin_add_overflow(a.mantissa, b.mantissa, &r.mantissa)) return std::nullopt;
  r.exponent = a.exponent;
  return r;
}

double to_double(Decimal d) {
  std::string digits;
  __int128 m = d.mantissa < 0 ? -d.mantissa : d.mantissa;
  if (m == 0) return 0.0;
  while (m > 0) {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(m % 10)));
    m /= 10;
  }
  std::string text = (d.mantissa < 0 ? "-" : "") + digits + "e" + std::to_string(d.exponent);
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

// h * a (+ 1 when on the diagonal), rounded once from the exact decimal value.
double euler_entry(double h, double a, bool add_one) {
  const auto prod = multiply(to_decimal(h), to_decimal(a));
  if (prod) {
    if (!add_one) return to_double(*prod);
    if (const auto sum = add(*prod, Decimal{1, 0})) return to_double(*sum);
  }
  return add_one ? 1.0 + h * a : h * a;
}

void check_gramian(const Matrix& g) {
  const auto ev = symmetric_eigenvalues(g);
  const double lo = ev.front();
  const double hi = ev.back();
  if (!(hi > 0.0) || lo < 1e-12 * hi) {
    throw NumericalError("Gramian is singular over the horizon (eigenvalues " +
                             format_number(lo) + " .. " + format_number(hi) + ")",
                         ErrorKind::UncontrollableHorizon);
  }
}

Matrix invert_b(const Matrix& b) {
  if (!b.is_square()) {
    throw NumericalError("B must be square to form the equilibrium input",
                         ErrorKind::Invertibility);
  }
  try {
    return inverse(b);
  } catch (const NumericalError&) {
    throw NumericalError("B is singular; the equilibrium input is undefined",
                         ErrorKind::Invertibility);
  }
}

}  // namespace

void LinearSystem::validate() const {
  if (!A.is_square() || A.rows() == 0) throw DimensionError("A must be a non-empty square matrix");
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw DimensionError("B must have " + std::to_string(A.rows()) + " rows");
  }
}

Matrix discrete_gramian(const LinearSystem& sys, int tau_h) {
  sys.validate();
  if (tau_h < 1) throw ParameterError("horizon must be at least one step");
  const Matrix bbt = sys.B * sys.B.transpose();
  const Matrix at = sys.A.transpose();
  Matrix g = bbt;
  Matrix term = bbt;
  for (int k = 1; k < tau_h; ++k) {
    term = sys.A * term * at;
    g += term;
  }
  return g;
}

MpcLaw build_mpc_law(const LinearSystem& sys, const Horizon& horizon) {
  sys.validate();
  MpcLaw law;
  law.flavor = sys.flavor;
  law.A = sys.A;
  law.B = sys.B;

  if (sys.flavor == Flavor::Discrete) {
    const auto* steps = std::get_if<HorizonSteps>(&horizon);
    if (!steps) throw ParameterError("a discrete system needs an integer horizon");
    if (steps->tau_h < 1) throw ParameterError("horizon must be at least one step");
    law.tau_h = steps->tau_h;
    law.G = discrete_gramian(sys, law.tau_h);
    check_gramian(law.G);
    const Matrix g_inv = spd_inverse(law.G);
    const Matrix a_tau = mat_power(sys.A, static_cast<unsigned>(law.tau_h));
    law.Gcal = a_tau.transpose() * g_inv * a_tau;
    law.gain = sys.B.transpose() *
               mat_power(sys.A.transpose(), static_cast<unsigned>(law.tau_h - 1)) * g_inv * a_tau;
  } else {
    const auto* t = std::get_if<HorizonTime>(&horizon);
    if (!t) throw ParameterError("a continuous system needs a time horizon");
    if (!(t->t_h > 0.0) || !std::isfinite(t->t_h)) {
      throw ParameterError("time horizon must be positive");
    }
    law.t_h = t->t_h;
    law.G = continuous_gramian(sys.A, sys.B, law.t_h);
    check_gramian(law.G);
    const Matrix g_inv = spd_inverse(law.G);
    const Matrix e = matrix_exponential(sys.A * law.t_h);
    law.Gcal = e.transpose() * g_inv * e;
    law.gain = sys.B.transpose() * law.Gcal;
  }
  // symmetrize the metric so quadratic forms are exact mirror images
  for (std::size_t r = 0; r < law.Gcal.rows(); ++r)
    for (std::size_t c = r + 1; c < law.Gcal.cols(); ++c) {
      const double s = 0.5 * (law.Gcal(r, c) + law.Gcal(c, r));
      law.Gcal(r, c) = s;
      law.Gcal(c, r) = s;
    }
  law.Abar = sys.A - sys.B * law.gain;
  law.B_inv = invert_b(sys.B);
  return law;
}

Vector equilibrium_input(const MpcLaw& law, std::span<const double> xhat) {
  require_vector(xhat, law.A.rows(), "equilibrium_input target");
  const Vector ax = law.A.apply(xhat);
  if (law.flavor == Flavor::Discrete) return law.B_inv.apply(difference(xhat, ax));
  Vector u = law.B_inv.apply(ax);
  for (double& v : u) v = -v;
  return u;
}

Vector mpc_control(const MpcLaw& law, std::span<const double> x, std::span<const double> xhat) {
  require_vector(x, law.A.rows(), "mpc_control state");
  Vector u = equilibrium_input(law, xhat);
  const Vector fb = law.gain.apply(difference(x, xhat));
  for (std::size_t i = 0; i < u.size(); ++i) u[i] -= fb[i];
  return u;
}

double mpc_cost(const MpcLaw& law, std::span<const double> x, std::span<const double> xhat) {
  require_vector(x, law.A.rows(), "mpc_cost state");
  require_vector(xhat, law.A.rows(), "mpc_cost target");
  return quadratic_form(law.Gcal, difference(x, xhat));
}

std::vector<Vector> open_loop_sequence(const MpcLaw& law, std::span<const double> x,
                                       std::span<const double> xhat) {
  if (law.flavor != Flavor::Discrete) {
    throw ParameterError("open_loop_sequence is defined for discrete laws only");
  }
  require_vector(x, law.A.rows(), "open_loop_sequence state");
  const Vector ubar = equilibrium_input(law, xhat);
  const Matrix g_inv = spd_inverse(law.G);
  const Matrix a_tau = mat_power(law.A, static_cast<unsigned>(law.tau_h));
  // w = G^{-1} A^tau (x - xhat); u_k = ubar - B^T (A^T)^{tau-1-k} w
  const Vector w = (g_inv * a_tau).apply(difference(x, xhat));
  const Matrix bt = law.B.transpose();
  const Matrix at = law.A.transpose();

  std::vector<Vector> seq(static_cast<std::size_t>(law.tau_h));
  Vector z = w;  // (A^T)^{tau-1-k} w, built from k = tau-1 downwards
  for (int k = law.tau_h - 1; k >= 0; --k) {
    const Vector corr = bt.apply(z);
    Vector u = ubar;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] -= corr[i];
    seq[static_cast<std::size_t>(k)] = std::move(u);
    if (k > 0) z = at.apply(z);
  }
  return seq;
}

LinearSystem discretize_euler(const LinearSystem& sys, double h) {
  sys.validate();
  if (sys.flavor != Flavor::Continuous) {
    throw ParameterError("discretize_euler expects a continuous system");
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("Euler step must be positive");
  LinearSystem d;
  d.flavor = Flavor::Discrete;
  d.A = Matrix(sys.A.rows(), sys.A.cols());
  d.B = Matrix(sys.B.rows(), sys.B.cols());
  for (std::size_t r = 0; r < sys.A.rows(); ++r)
    for (std::size_t c = 0; c < sys.A.cols(); ++c)
      d.A(r, c) = euler_entry(h, sys.A(r, c), r == c);
  for (std::size_t r = 0; r < sys.B.rows(); ++r)
    for (std::size_t c = 0; c < sys.B.cols(); ++c) d.B(r, c) = euler_entry(h, sys.B(r, c), false);
  return d;
}

}  // namespace smpc::mpc
