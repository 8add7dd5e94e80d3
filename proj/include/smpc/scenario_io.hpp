#pragma once

// JSON scenario files. A file describes the fleet declaratively (point
// generators, shared or per-agent dynamics); materialize() expands it.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smpc/fleet.hpp"

namespace smpc::io {

inline constexpr int kSchemaVersion = 1;

struct PointSource {
  enum class Kind { Points, Grid, UniformBox, Linspace };
  Kind kind = Kind::Points;
  std::vector<Vector> points;   // Points
  Vector min;                   // Grid, UniformBox, Linspace (as "from")
  Vector max;                   // Grid, UniformBox, Linspace (as "to")
  std::vector<std::size_t> shape;  // Grid
  std::size_t count = 0;           // UniformBox, Linspace

  std::size_t size() const;
};

struct DynamicsSpec {
  mpc::Flavor flavor = mpc::Flavor::Discrete;
  Matrix A;
  Matrix B;
};

struct ScheduleSpec {
  enum class Kind { Tolerance, Fixed };
  Kind kind = Kind::Tolerance;
  double threshold = 0.005;
  long cap = 10'000;
  long iterations = 1;
};

struct ScenarioFile {
  int schema_version = kSchemaVersion;
  std::string name;
  std::size_t agents = 0;
  std::vector<DynamicsSpec> dynamics;  // one shared entry, or one per agent
  std::optional<double> euler_step;
  PointSource targets;
  PointSource initial_states;
  std::optional<std::vector<double>> marginal_a;  // both set or both empty (uniform)
  std::optional<std::vector<double>> marginal_b;
  double epsilon = 1.0;
  int horizon = 1;
  ScheduleSpec schedule;
  std::vector<double> alpha0;
  long steps = 0;
  std::uint64_t seed = 0;
  SnapshotPolicy snapshots = SnapshotPolicy::Auto;
  bool diagnostics = false;
  std::string output_dir = "out";
  std::string log_level = "info";
};

/// Throws SchemaError (with line and field where known) on invalid input.
ScenarioFile parse_scenario(std::string_view text);
ScenarioFile load_scenario(const std::filesystem::path& path);

/// Sorted keys, two-space indent, trailing newline; parse(canonical(s))
/// reproduces the same bytes.
std::string canonical_json(const ScenarioFile& s);

/// Expands generators (seeded) and builds the simulation scenario.
FleetScenario materialize(const ScenarioFile& s);

/// The generated points, in materialize() order: targets first, then
/// initial states, from one seeded stream.
std::pair<std::vector<Vector>, std::vector<Vector>> generate_points(const ScenarioFile& s);

}  // namespace smpc::io
