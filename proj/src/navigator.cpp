#include "smpc/navigator.hpp"

#include <string>

namespace smpc {

std::vector<Vector> barycentric_targets(const ot::Coupling& p, const TargetSet& targets,
                                        std::span<const ot::Real> a) {
  if (targets.size() != p.cols) {
    throw DimensionError("navigator: " + std::to_string(targets.size()) + " targets for a " +
                         std::to_string(p.rows) + "x" + std::to_string(p.cols) + " coupling");
  }
  if (a.size() != p.rows) throw DimensionError("navigator: marginal length mismatch");
  const std::size_t n = targets.empty() ? 0 : targets.front().size();
  std::vector<Vector> out(p.rows, Vector(n, 0.0));
  std::vector<ot::Real> acc(n);
  for (std::size_t i = 0; i < p.rows; ++i) {
    if (!(a[i] > 0)) {
      throw Error(ErrorKind::DegenerateRow,
                  "navigator: row marginal " + std::to_string(i) + " is zero");
    }
    std::fill(acc.begin(), acc.end(), ot::Real(0));
    for (std::size_t j = 0; j < p.cols; ++j) {
      const ot::Real w = p(i, j);
      for (std::size_t d = 0; d < n; ++d) acc[d] += w * targets[j][d];
    }
    for (std::size_t d = 0; d < n; ++d) out[i][d] = static_cast<double>(acc[d] / a[i]);
  }
  return out;
}

std::vector<Vector> navigate(const NavigatorKind& nav, const ot::Coupling& p,
                             const TargetSet& targets, std::span<const ot::Real> a) {
  if (const auto* hook = std::get_if<NavigatorHook>(&nav)) return (*hook)(p, targets, a);
  return barycentric_targets(p, targets, a);
}

}  // namespace smpc
