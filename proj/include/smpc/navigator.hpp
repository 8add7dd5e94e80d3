#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "smpc/numerics.hpp"
#include "smpc/otcore.hpp"

namespace smpc {

using TargetSet = std::vector<Vector>;

/// x_i = (1/a_i) sum_j P_ij x_j^d. Throws DegenerateRow when a_i == 0.
std::vector<Vector> barycentric_targets(const ot::Coupling& p, const TargetSet& targets,
                                        std::span<const ot::Real> a);

struct Barycentric {};
/// Any map from a coupling to per-agent temporary targets.
using NavigatorHook = std::function<std::vector<Vector>(
    const ot::Coupling&, const TargetSet&, std::span<const ot::Real>)>;
using NavigatorKind = std::variant<Barycentric, NavigatorHook>;

std::vector<Vector> navigate(const NavigatorKind& nav, const ot::Coupling& p,
                             const TargetSet& targets, std::span<const ot::Real> a);

}  // namespace smpc
