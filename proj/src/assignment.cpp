#include "smpc/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace smpc {

namespace {

void require_square(const ot::CostMatrix& c) {
  if (c.rows() != c.cols()) {
    throw DimensionError("assignment needs a square cost matrix, got " + std::to_string(c.rows()) +
                         "x" + std::to_string(c.cols()));
  }
}

double cost_of(const ot::CostMatrix& c, const std::vector<std::size_t>& sigma) {
  double s = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) s += c(i, sigma[i]);
  return s;
}

}  // namespace

Assignment hungarian(const ot::CostMatrix& c) {
  require_square(c);
  const std::size_t n = c.rows();
  if (n == 0) return {};

  // Potentials u (rows), v (columns); p[j] is the row matched to column j.
  // Index 0 is a virtual column used as the root of each augmenting search.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      const double ui0 = u[i0];
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - ui0 - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment a;
  a.sigma.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) a.sigma[p[j] - 1] = j - 1;
  a.total_cost = cost_of(c, a.sigma);
  return a;
}

Assignment brute_force_assignment(const ot::CostMatrix& c) {
  require_square(c);
  const std::size_t n = c.rows();
  if (n > 9) {
    throw Error(ErrorKind::SizeCap,
                "brute_force_assignment is limited to N <= 9, got " + std::to_string(n));
  }
  std::vector<std::size_t> sigma(n);
  std::iota(sigma.begin(), sigma.end(), std::size_t{0});
  Assignment best{sigma, cost_of(c, sigma)};
  while (std::next_permutation(sigma.begin(), sigma.end())) {
    const double cost = cost_of(c, sigma);
    if (cost < best.total_cost) best = {sigma, cost};
  }
  return best;
}

}  // namespace smpc
