#include "smpc/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace smpc::io {

namespace {

using json = nlohmann::json;

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw SchemaError(field, msg, line_of(field));
  }

  const json& require(const json& obj, const std::string& key, const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + key, "missing required field");
    return *it;
  }

  void only_keys(const json& obj, std::initializer_list<const char*> allowed,
                 const std::string& path) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::none_of(allowed.begin(), allowed.end(),
                       [&](const char* k) { return it.key() == k; })) {
        fail(path + it.key(), "unknown field");
      }
    }
  }

  const json& object(const json& j, const std::string& field) const {
    if (!j.is_object()) fail(field, "expected an object");
    return j;
  }

  double number(const json& j, const std::string& field) const {
    if (!j.is_number()) fail(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(field, "expected a finite number");
    return v;
  }

  long integer(const json& j, const std::string& field) const {
    if (!j.is_number_integer()) fail(field, "expected an integer");
    return j.get<long>();
  }

  std::uint64_t unsigned_integer(const json& j, const std::string& field) const {
    if (!j.is_number_unsigned()) fail(field, "expected a nonnegative integer");
    return j.get<std::uint64_t>();
  }

  std::string string(const json& j, const std::string& field) const {
    if (!j.is_string()) fail(field, "expected a string");
    return j.get<std::string>();
  }

  bool boolean(const json& j, const std::string& field) const {
    if (!j.is_boolean()) fail(field, "expected true or false");
    return j.get<bool>();
  }

  Vector vector(const json& j, const std::string& field) const {
    if (!j.is_array()) fail(field, "expected an array of numbers");
    Vector v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], field));
    return v;
  }

  Matrix matrix(const json& j, const std::string& field) const {
    if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array of rows");
    std::vector<double> entries;
    std::size_t cols = 0;
    for (std::size_t r = 0; r < j.size(); ++r) {
      const Vector row = vector(j[r], field);
      if (r == 0) cols = row.size();
      if (row.size() != cols || cols == 0) fail(field, "rows must have equal, non-zero length");
      entries.insert(entries.end(), row.begin(), row.end());
    }
    return Matrix(j.size(), cols, std::move(entries));
  }

 private:
  std::size_t line_of(const std::string& field) const {
    const auto dot = field.find_last_of('.');
    const std::string leaf = dot == std::string::npos ? field : field.substr(dot + 1);
    const auto pos = text_.find("\"" + leaf + "\"");
    if (pos == std::string_view::npos) return 0;
    return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + pos, '\n'));
  }

  std::string_view text_;
};

PointSource read_points(const Reader& rd, const json& j, const std::string& field) {
  rd.object(j, field);
  if (j.size() != 1) rd.fail(field, "expected exactly one of points, grid, uniform_box, linspace");
  PointSource p;
  const std::string kind = j.begin().key();
  const json& body = j.begin().value();
  const std::string path = field + "." + kind;
  if (kind == "points") {
    p.kind = PointSource::Kind::Points;
    if (!body.is_array() || body.empty()) rd.fail(path, "expected a non-empty array of points");
    for (const auto& pt : body) p.points.push_back(rd.vector(pt, path));
    for (const auto& pt : p.points)
      if (pt.size() != p.points.front().size() || pt.empty()) rd.fail(path, "points differ in dimension");
  } else if (kind == "grid" || kind == "uniform_box") {
    rd.object(body, path);
    p.kind = kind == "grid" ? PointSource::Kind::Grid : PointSource::Kind::UniformBox;
    if (kind == "grid") {
      rd.only_keys(body, {"min", "max", "shape"}, path + ".");
      const json& shape = rd.require(body, "shape", path + ".");
      if (!shape.is_array()) rd.fail(path + ".shape", "expected an array of counts");
      for (const auto& s : shape) {
        const long c = rd.integer(s, path + ".shape");
        if (c < 1) rd.fail(path + ".shape", "counts must be positive");
        p.shape.push_back(static_cast<std::size_t>(c));
      }
    } else {
      rd.only_keys(body, {"min", "max", "count"}, path + ".");
      const long c = rd.integer(rd.require(body, "count", path + "."), path + ".count");
      if (c < 1) rd.fail(path + ".count", "count must be positive");
      p.count = static_cast<std::size_t>(c);
    }
    p.min = rd.vector(rd.require(body, "min", path + "."), path + ".min");
    p.max = rd.vector(rd.require(body, "max", path + "."), path + ".max");
    if (p.min.empty() || p.min.size() != p.max.size()) rd.fail(path, "min and max must match in dimension");
    if (kind == "grid" && p.shape.size() != p.min.size()) rd.fail(path + ".shape", "one count per dimension");
    for (std::size_t d = 0; d < p.min.size(); ++d)
      if (p.min[d] > p.max[d]) rd.fail(path, "min exceeds max");
  } else if (kind == "linspace") {
    rd.object(body, path);
    rd.only_keys(body, {"from", "to", "count"}, path + ".");
    p.kind = PointSource::Kind::Linspace;
    p.min = rd.vector(rd.require(body, "from", path + "."), path + ".from");
    p.max = rd.vector(rd.require(body, "to", path + "."), path + ".to");
    if (p.min.empty() || p.min.size() != p.max.size()) rd.fail(path, "from and to must match in dimension");
    const long c = rd.integer(rd.require(body, "count", path + "."), path + ".count");
    if (c < 1) rd.fail(path + ".count", "count must be positive");
    p.count = static_cast<std::size_t>(c);
  } else {
    rd.fail(field + "." + kind, "unknown point source");
  }
  return p;
}

DynamicsSpec read_dynamics(const Reader& rd, const json& j, const std::string& field) {
  rd.object(j, field);
  rd.only_keys(j, {"flavor", "A", "B"}, field + ".");
  DynamicsSpec d;
  const std::string flavor = rd.string(rd.require(j, "flavor", field + "."), field + ".flavor");
  if (flavor == "discrete") {
    d.flavor = mpc::Flavor::Discrete;
  } else if (flavor == "continuous") {
    d.flavor = mpc::Flavor::Continuous;
  } else {
    rd.fail(field + ".flavor", "expected \"discrete\" or \"continuous\"");
  }
  d.A = rd.matrix(rd.require(j, "A", field + "."), field + ".A");
  d.B = rd.matrix(rd.require(j, "B", field + "."), field + ".B");
  if (!d.A.is_square()) rd.fail(field + ".A", "A must be square");
  if (d.B.rows() != d.A.rows()) rd.fail(field + ".B", "B must have as many rows as A");
  return d;
}

std::size_t point_dim(const PointSource& p) {
  return p.kind == PointSource::Kind::Points ? p.points.front().size() : p.min.size();
}

json points_to_json(const PointSource& p) {
  json body;
  switch (p.kind) {
    case PointSource::Kind::Points:
      return json{{"points", p.points}};
    case PointSource::Kind::Grid:
      body = {{"min", p.min}, {"max", p.max}, {"shape", p.shape}};
      return json{{"grid", body}};
    case PointSource::Kind::UniformBox:
      body = {{"min", p.min}, {"max", p.max}, {"count", p.count}};
      return json{{"uniform_box", body}};
    case PointSource::Kind::Linspace:
      body = {{"from", p.min}, {"to", p.max}, {"count", p.count}};
      return json{{"linspace", body}};
  }
  return body;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json dynamics_to_json(const DynamicsSpec& d) {
  return json{{"flavor", d.flavor == mpc::Flavor::Discrete ? "discrete" : "continuous"},
              {"A", matrix_to_json(d.A)},
              {"B", matrix_to_json(d.B)}};
}

const char* snapshot_name(SnapshotPolicy p) {
  switch (p) {
    case SnapshotPolicy::On:
      return "on";
    case SnapshotPolicy::Off:
      return "off";
    case SnapshotPolicy::Auto:
      break;
  }
  return "auto";
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<Vector> expand(const PointSource& p, std::mt19937_64& rng) {
  std::vector<Vector> out;
  const std::size_t dim = point_dim(p);
  switch (p.kind) {
    case PointSource::Kind::Points:
      return p.points;
    case PointSource::Kind::Grid: {
      std::vector<std::size_t> idx(dim, 0);
      const std::size_t total = p.size();
      for (std::size_t n = 0; n < total; ++n) {
        Vector v(dim);
        for (std::size_t d = 0; d < dim; ++d) {
          v[d] = p.shape[d] == 1 ? p.min[d]
                                 : p.min[d] + (p.max[d] - p.min[d]) * static_cast<double>(idx[d]) /
                                                  static_cast<double>(p.shape[d] - 1);
        }
        out.push_back(std::move(v));
        // last dimension varies fastest
        for (std::size_t d = dim; d-- > 0;) {
          if (++idx[d] < p.shape[d]) break;
          idx[d] = 0;
        }
      }
      return out;
    }
    case PointSource::Kind::UniformBox:
      for (std::size_t n = 0; n < p.count; ++n) {
        Vector v(dim);
        for (std::size_t d = 0; d < dim; ++d) v[d] = p.min[d] + (p.max[d] - p.min[d]) * unit(rng);
        out.push_back(std::move(v));
      }
      return out;
    case PointSource::Kind::Linspace:
      for (std::size_t n = 0; n < p.count; ++n) {
        Vector v(dim);
        const double t = p.count == 1 ? 0.0 : static_cast<double>(n) / static_cast<double>(p.count - 1);
        for (std::size_t d = 0; d < dim; ++d) v[d] = p.min[d] + (p.max[d] - p.min[d]) * t;
        out.push_back(std::move(v));
      }
      return out;
  }
  return out;
}

}  // namespace

std::size_t PointSource::size() const {
  switch (kind) {
    case Kind::Points:
      return points.size();
    case Kind::Grid: {
      std::size_t n = 1;
      for (auto s : shape) n *= s;
      return n;
    }
    case Kind::UniformBox:
    case Kind::Linspace:
      return count;
  }
  return 0;
}

ScenarioFile parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + (byte ? byte - 1 : 0), '\n'));
    throw SchemaError("(document)", std::string("malformed JSON: ") + e.what(), line);
  }
  const Reader rd(text);
  if (!root.is_object()) rd.fail("(document)", "expected a JSON object");
  rd.only_keys(root,
               {"schema_version", "name", "agents", "dynamics", "euler_step", "targets",
                "initial_states", "marginals", "epsilon", "horizon", "schedule", "alpha0", "steps",
                "seed", "snapshots", "diagnostics", "output_dir", "log_level"},
               "");

  ScenarioFile s;
  s.schema_version = static_cast<int>(rd.integer(rd.require(root, "schema_version", ""), "schema_version"));
  if (s.schema_version != kSchemaVersion) {
    rd.fail("schema_version", "unsupported version " + std::to_string(s.schema_version));
  }
  s.name = rd.string(rd.require(root, "name", ""), "name");
  const long agents = rd.integer(rd.require(root, "agents", ""), "agents");
  if (agents < 1) rd.fail("agents", "must be at least 1");
  s.agents = static_cast<std::size_t>(agents);

  const json& dyn = rd.require(root, "dynamics", "");
  if (dyn.is_array()) {
    if (dyn.size() != s.agents) rd.fail("dynamics", "per-agent dynamics must list one entry per agent");
    for (std::size_t i = 0; i < dyn.size(); ++i)
      s.dynamics.push_back(read_dynamics(rd, dyn[i], "dynamics[" + std::to_string(i) + "]"));
  } else {
    s.dynamics.push_back(read_dynamics(rd, dyn, "dynamics"));
  }
  const std::size_t dim = s.dynamics.front().A.rows();
  bool continuous = false;
  for (const auto& d : s.dynamics) {
    if (d.A.rows() != dim) rd.fail("dynamics", "all agents must share the state dimension");
    continuous = continuous || d.flavor == mpc::Flavor::Continuous;
  }
  if (root.contains("euler_step")) {
    s.euler_step = rd.number(root["euler_step"], "euler_step");
    if (!(*s.euler_step > 0.0)) rd.fail("euler_step", "must be positive");
  }
  if (continuous && !s.euler_step) rd.fail("euler_step", "continuous dynamics need an Euler step");

  s.targets = read_points(rd, rd.require(root, "targets", ""), "targets");
  s.initial_states = read_points(rd, rd.require(root, "initial_states", ""), "initial_states");
  if (point_dim(s.targets) != dim) rd.fail("targets", "dimension does not match the dynamics");
  if (point_dim(s.initial_states) != dim) rd.fail("initial_states", "dimension does not match the dynamics");
  if (s.initial_states.size() != s.agents) rd.fail("initial_states", "must produce one state per agent");

  if (root.contains("marginals")) {
    const json& m = rd.object(root["marginals"], "marginals");
    const std::string kind = rd.string(rd.require(m, "kind", "marginals."), "marginals.kind");
    if (kind == "uniform") {
      rd.only_keys(m, {"kind"}, "marginals.");
    } else if (kind == "explicit") {
      rd.only_keys(m, {"kind", "a", "b"}, "marginals.");
      s.marginal_a = rd.vector(rd.require(m, "a", "marginals."), "marginals.a");
      s.marginal_b = rd.vector(rd.require(m, "b", "marginals."), "marginals.b");
      if (s.marginal_a->size() != s.agents) rd.fail("marginals.a", "one weight per agent");
      if (s.marginal_b->size() != s.targets.size()) rd.fail("marginals.b", "one weight per target");
    } else {
      rd.fail("marginals.kind", "expected \"uniform\" or \"explicit\"");
    }
  } else if (s.targets.size() == 0) {
    rd.fail("targets", "no targets");
  }

  s.epsilon = rd.number(rd.require(root, "epsilon", ""), "epsilon");
  if (!(s.epsilon > 0.0)) rd.fail("epsilon", "must be positive");
  const long horizon = rd.integer(rd.require(root, "horizon", ""), "horizon");
  if (horizon < 1 || horizon > 1'000'000) rd.fail("horizon", "must be a positive step count");
  s.horizon = static_cast<int>(horizon);

  if (root.contains("schedule")) {
    const json& sc = rd.object(root["schedule"], "schedule");
    const std::string kind = rd.string(rd.require(sc, "kind", "schedule."), "schedule.kind");
    if (kind == "tolerance") {
      rd.only_keys(sc, {"kind", "threshold", "cap"}, "schedule.");
      s.schedule.kind = ScheduleSpec::Kind::Tolerance;
      s.schedule.threshold = rd.number(rd.require(sc, "threshold", "schedule."), "schedule.threshold");
      if (!(s.schedule.threshold > 0.0)) rd.fail("schedule.threshold", "must be positive");
      if (sc.contains("cap")) s.schedule.cap = rd.integer(sc["cap"], "schedule.cap");
      if (s.schedule.cap < 1) rd.fail("schedule.cap", "must be at least 1");
    } else if (kind == "fixed") {
      rd.only_keys(sc, {"kind", "iterations"}, "schedule.");
      s.schedule.kind = ScheduleSpec::Kind::Fixed;
      s.schedule.iterations = rd.integer(rd.require(sc, "iterations", "schedule."), "schedule.iterations");
      if (s.schedule.iterations < 1) rd.fail("schedule.iterations", "must be at least 1");
    } else {
      rd.fail("schedule.kind", "expected \"tolerance\" or \"fixed\"");
    }
  }

  if (root.contains("alpha0")) {
    s.alpha0 = rd.vector(root["alpha0"], "alpha0");
    if (s.alpha0.size() != s.agents) rd.fail("alpha0", "one entry per agent");
    for (double v : s.alpha0)
      if (!(v > 0.0)) rd.fail("alpha0", "entries must be positive");
  }
  s.steps = rd.integer(rd.require(root, "steps", ""), "steps");
  if (s.steps < 0) rd.fail("steps", "must be nonnegative");
  if (root.contains("seed")) s.seed = rd.unsigned_integer(root["seed"], "seed");
  if (root.contains("snapshots")) {
    const std::string v = rd.string(root["snapshots"], "snapshots");
    if (v == "auto") {
      s.snapshots = SnapshotPolicy::Auto;
    } else if (v == "on") {
      s.snapshots = SnapshotPolicy::On;
    } else if (v == "off") {
      s.snapshots = SnapshotPolicy::Off;
    } else {
      rd.fail("snapshots", "expected auto, on or off");
    }
  }
  if (root.contains("diagnostics")) s.diagnostics = rd.boolean(root["diagnostics"], "diagnostics");
  if (root.contains("output_dir")) s.output_dir = rd.string(root["output_dir"], "output_dir");
  if (root.contains("log_level")) {
    s.log_level = rd.string(root["log_level"], "log_level");
    if (s.log_level != "error" && s.log_level != "warn" && s.log_level != "info" &&
        s.log_level != "debug") {
      rd.fail("log_level", "expected error, warn, info or debug");
    }
  }
  return s;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string canonical_json(const ScenarioFile& s) {
  json root;
  root["schema_version"] = s.schema_version;
  root["name"] = s.name;
  root["agents"] = s.agents;
  if (s.dynamics.size() == 1) {
    root["dynamics"] = dynamics_to_json(s.dynamics.front());
  } else {
    json arr = json::array();
    for (const auto& d : s.dynamics) arr.push_back(dynamics_to_json(d));
    root["dynamics"] = arr;
  }
  if (s.euler_step) root["euler_step"] = *s.euler_step;
  root["targets"] = points_to_json(s.targets);
  root["initial_states"] = points_to_json(s.initial_states);
  if (s.marginal_a && s.marginal_b) {
    root["marginals"] = {{"kind", "explicit"}, {"a", *s.marginal_a}, {"b", *s.marginal_b}};
  } else {
    root["marginals"] = {{"kind", "uniform"}};
  }
  root["epsilon"] = s.epsilon;
  root["horizon"] = s.horizon;
  if (s.schedule.kind == ScheduleSpec::Kind::Tolerance) {
    root["schedule"] = {{"kind", "tolerance"}, {"threshold", s.schedule.threshold}, {"cap", s.schedule.cap}};
  } else {
    root["schedule"] = {{"kind", "fixed"}, {"iterations", s.schedule.iterations}};
  }
  if (!s.alpha0.empty()) root["alpha0"] = s.alpha0;
  root["steps"] = s.steps;
  root["seed"] = s.seed;
  root["snapshots"] = snapshot_name(s.snapshots);
  root["diagnostics"] = s.diagnostics;
  root["output_dir"] = s.output_dir;
  root["log_level"] = s.log_level;
  return root.dump(2) + "\n";
}

std::pair<std::vector<Vector>, std::vector<Vector>> generate_points(const ScenarioFile& s) {
  std::mt19937_64 rng(s.seed);
  auto targets = expand(s.targets, rng);
  auto initial = expand(s.initial_states, rng);
  return {std::move(targets), std::move(initial)};
}

FleetScenario materialize(const ScenarioFile& s) {
  FleetScenario f;
  auto [targets, initial] = generate_points(s);
  f.targets = std::move(targets);
  f.x0 = std::move(initial);
  for (std::size_t i = 0; i < s.agents; ++i) {
    const auto& d = s.dynamics.size() == 1 ? s.dynamics.front() : s.dynamics[i];
    f.systems.push_back(mpc::LinearSystem{d.A, d.B, d.flavor});
  }
  f.euler_step = s.euler_step;
  if (s.marginal_a && s.marginal_b) {
    f.marginals.a.assign(s.marginal_a->begin(), s.marginal_a->end());
    f.marginals.b.assign(s.marginal_b->begin(), s.marginal_b->end());
  } else {
    f.marginals = ot::Marginals::uniform(f.x0.size(), f.targets.size());
  }
  f.epsilon = s.epsilon;
  f.tau_h = s.horizon;
  if (s.schedule.kind == ScheduleSpec::Kind::Tolerance) {
    f.schedule = ot::MarginalTolerance{s.schedule.threshold, s.schedule.cap};
  } else {
    f.schedule = ot::FixedCount{s.schedule.iterations};
  }
  f.alpha0.assign(s.alpha0.begin(), s.alpha0.end());
  f.step_count = s.steps;
  f.snapshots = s.snapshots;
  f.diagnostics = s.diagnostics;
  f.validate();
  return f;
}

}  // namespace smpc::io
