#pragma once

// Minimum-energy finite-horizon MPC for linear agents.

#include <variant>
#include <vector>

#include "smpc/numerics.hpp"

namespace smpc::mpc {

enum class Flavor { Discrete, Continuous };

struct LinearSystem {
  Matrix A;
  Matrix B;
  Flavor flavor = Flavor::Discrete;

  std::size_t state_dim() const noexcept { return A.rows(); }
  /// Throws DimensionError unless A is square and B has A's row count.
  void validate() const;
};

struct HorizonSteps {
  int tau_h = 1;
};
struct HorizonTime {
  double t_h = 1.0;
};
using Horizon = std::variant<HorizonSteps, HorizonTime>;

struct MpcLaw {
  Flavor flavor = Flavor::Discrete;
  int tau_h = 0;      // discrete horizon
  double t_h = 0.0;   // continuous horizon
  Matrix A;
  Matrix B;
  Matrix B_inv;
  Matrix G;      // controllability Gramian over the horizon
  Matrix Gcal;   // cost metric: cost(x, xhat) = |x - xhat|^2 in this metric
  Matrix gain;   // u = -gain (x - xhat) + feedforward(xhat)
  Matrix Abar;   // closed loop A - B gain (continuous: the generator)
};

/// sum_{k < tau_h} A^k B B^T (A^T)^k
Matrix discrete_gramian(const LinearSystem& sys, int tau_h);

/// Builds the law. Discrete systems take HorizonSteps, continuous ones
/// HorizonTime. Throws UncontrollableHorizon if the Gramian is numerically
/// singular (min eigenvalue < 1e-12 max, or condition number > 1e12) and
/// Invertibility if B is singular.
MpcLaw build_mpc_law(const LinearSystem& sys, const Horizon& horizon);

/// Input that holds x = xhat fixed.
Vector equilibrium_input(const MpcLaw& law, std::span<const double> xhat);

Vector mpc_control(const MpcLaw& law, std::span<const double> x, std::span<const double> xhat);

double mpc_cost(const MpcLaw& law, std::span<const double> x, std::span<const double> xhat);

/// The full minimum-energy input sequence (discrete laws only). Applying it
/// from x reaches xhat after tau_h steps.
std::vector<Vector> open_loop_sequence(const MpcLaw& law, std::span<const double> x,
                                       std::span<const double> xhat);

/// A_d = I + h A_c, B_d = h B_c. Entries are formed from the shortest
/// decimal representation of each operand, so h = 0.02 and A_c = 1.3 give
/// exactly the double nearest 0.026.
LinearSystem discretize_euler(const LinearSystem& sys, double h);

}  // namespace smpc::mpc
