#include "sinkhorn_mpc.h"

#include <cstring>
#include <string>

#include "smpc/assignment.hpp"
#include "smpc/experiments.hpp"

struct smpc_scenario {
  smpc::io::ScenarioFile file;
};

namespace {

thread_local std::string g_last_error;

smpc_status status_of(const smpc::Error& e) {
  using smpc::ErrorKind;
  switch (e.kind()) {
    case ErrorKind::Schema:
      return SMPC_ERR_SCHEMA;
    case ErrorKind::Io:
      return SMPC_ERR_IO;
    case ErrorKind::Dimension:
      return SMPC_ERR_DIMENSION;
    case ErrorKind::Parameter:
    case ErrorKind::Domain:
    case ErrorKind::SizeCap:
      return SMPC_ERR_PARAMETER;
    case ErrorKind::UncontrollableHorizon:
    case ErrorKind::Invertibility:
      return SMPC_ERR_MODEL;
    case ErrorKind::NonConvergence:
      return SMPC_ERR_NONCONVERGENCE;
    case ErrorKind::DegenerateKernel:
    case ErrorKind::NumericalBreakdown:
    case ErrorKind::DegenerateRow:
    case ErrorKind::Numerical:
      return SMPC_ERR_NUMERICAL;
  }
  return SMPC_ERR_INTERNAL;
}

smpc_status fail(smpc_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

// Runs body, translating exceptions into status codes.
template <class F>
smpc_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return SMPC_OK;
  } catch (const smpc::Error& e) {
    return fail(status_of(e), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SMPC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SMPC_ERR_INTERNAL, e.what());
  }
}

smpc_status copy_string(const std::string& s, char* buffer, size_t capacity, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buffer && capacity > 0) {
    const size_t n = std::min(capacity - 1, s.size());
    std::memcpy(buffer, s.data(), n);
    buffer[n] = '\0';
  }
  return SMPC_OK;
}

std::optional<std::filesystem::path> dir_or_none(const char* out_dir) {
  if (!out_dir) return std::nullopt;
  return std::filesystem::path(out_dir);
}

}  // namespace

extern "C" {

SMPC_API const char* smpc_version(void) { return "1.0.0"; }

SMPC_API const char* smpc_status_string(smpc_status status) {
  switch (status) {
    case SMPC_OK:
      return "ok";
    case SMPC_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case SMPC_ERR_SCHEMA:
      return "schema error";
    case SMPC_ERR_IO:
      return "i/o error";
    case SMPC_ERR_DIMENSION:
      return "dimension error";
    case SMPC_ERR_PARAMETER:
      return "parameter error";
    case SMPC_ERR_MODEL:
      return "model error";
    case SMPC_ERR_NUMERICAL:
      return "numerical error";
    case SMPC_ERR_NONCONVERGENCE:
      return "non-convergence";
    case SMPC_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

SMPC_API int smpc_status_is_input_error(smpc_status status) {
  switch (status) {
    case SMPC_ERR_INVALID_ARGUMENT:
    case SMPC_ERR_SCHEMA:
    case SMPC_ERR_IO:
    case SMPC_ERR_DIMENSION:
    case SMPC_ERR_PARAMETER:
    case SMPC_ERR_MODEL:
      return 1;
    default:
      return 0;
  }
}

SMPC_API const char* smpc_last_error(void) { return g_last_error.c_str(); }

SMPC_API smpc_status smpc_scenario_load(const char* path, smpc_scenario** out) {
  if (!path || !out) return fail(SMPC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new smpc_scenario{smpc::io::load_scenario(path)}; });
}

SMPC_API smpc_status smpc_scenario_parse(const char* text, size_t length, smpc_scenario** out) {
  if (!text || !out) return fail(SMPC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded(
      [&] { *out = new smpc_scenario{smpc::io::parse_scenario(std::string_view(text, length))}; });
}

SMPC_API void smpc_scenario_free(smpc_scenario* scenario) { delete scenario; }

SMPC_API smpc_status smpc_scenario_set_seed(smpc_scenario* scenario, uint64_t seed) {
  if (!scenario) return fail(SMPC_ERR_INVALID_ARGUMENT, "null scenario");
  scenario->file.seed = seed;
  g_last_error.clear();
  return SMPC_OK;
}

SMPC_API smpc_status smpc_scenario_set_snapshots(smpc_scenario* scenario, smpc_snapshots policy) {
  if (!scenario) return fail(SMPC_ERR_INVALID_ARGUMENT, "null scenario");
  switch (policy) {
    case SMPC_SNAPSHOTS_AUTO:
      scenario->file.snapshots = smpc::SnapshotPolicy::Auto;
      break;
    case SMPC_SNAPSHOTS_ON:
      scenario->file.snapshots = smpc::SnapshotPolicy::On;
      break;
    case SMPC_SNAPSHOTS_OFF:
      scenario->file.snapshots = smpc::SnapshotPolicy::Off;
      break;
    default:
      return fail(SMPC_ERR_INVALID_ARGUMENT, "unknown snapshot policy");
  }
  g_last_error.clear();
  return SMPC_OK;
}

SMPC_API smpc_status smpc_scenario_agents(const smpc_scenario* scenario, size_t* out) {
  if (!scenario || !out) return fail(SMPC_ERR_INVALID_ARGUMENT, "null argument");
  *out = scenario->file.agents;
  g_last_error.clear();
  return SMPC_OK;
}

SMPC_API smpc_status smpc_scenario_output_dir(const smpc_scenario* scenario, char* buffer,
                                              size_t capacity, size_t* needed) {
  if (!scenario) return fail(SMPC_ERR_INVALID_ARGUMENT, "null scenario");
  g_last_error.clear();
  return copy_string(scenario->file.output_dir, buffer, capacity, needed);
}

SMPC_API smpc_status smpc_scenario_canonical_json(const smpc_scenario* scenario, char* buffer,
                                                  size_t capacity, size_t* needed) {
  if (!scenario) return fail(SMPC_ERR_INVALID_ARGUMENT, "null scenario");
  std::string text;
  const smpc_status s = guarded([&] { text = smpc::io::canonical_json(scenario->file); });
  if (s != SMPC_OK) return s;
  return copy_string(text, buffer, capacity, needed);
}

SMPC_API smpc_status smpc_validate(const smpc_scenario* scenario) {
  if (!scenario) return fail(SMPC_ERR_INVALID_ARGUMENT, "null scenario");
  return guarded([&] { smpc::FleetModel model(smpc::io::materialize(scenario->file)); });
}

SMPC_API smpc_status smpc_run(const smpc_scenario* scenario, smpc_mode mode, const char* out_dir,
                              smpc_run_summary* summary) {
  if (!scenario) return fail(SMPC_ERR_INVALID_ARGUMENT, "null scenario");
  smpc::exp::RunMode m;
  switch (mode) {
    case SMPC_MODE_SINKHORN:
      m = smpc::exp::RunMode::Sinkhorn;
      break;
    case SMPC_MODE_HUNGARIAN_BASELINE:
      m = smpc::exp::RunMode::HungarianBaseline;
      break;
    case SMPC_MODE_FIXED_BASELINE:
      m = smpc::exp::RunMode::FixedBaseline;
      break;
    default:
      return fail(SMPC_ERR_INVALID_ARGUMENT, "unknown run mode");
  }
  return guarded([&] {
    const auto res = smpc::exp::run_experiment(scenario->file, m, dir_or_none(out_dir));
    if (summary) {
      const auto& s = res.summary;
      summary->agents = s.agents;
      summary->steps = s.steps;
      summary->total_raw_energy = s.total_raw_energy;
      summary->total_deviation_energy = s.total_deviation_energy;
      summary->final_residual = s.final_residual;
      summary->first_step_iterations = s.first_step_iterations;
      summary->total_sinkhorn_iterations = s.total_sinkhorn_iterations;
      summary->sinkhorn_seconds_per_iteration = s.sinkhorn_seconds_per_iteration;
      summary->hungarian_seconds_per_solve = s.hungarian_seconds_per_solve;
      summary->assignment_changes = s.assignment_changes;
      summary->warning_count = s.warnings.size();
    }
  });
}

SMPC_API smpc_status smpc_sweep(const smpc_scenario* scenario, const double* epsilons,
                                size_t count, const char* out_dir, size_t* failed_rows) {
  if (!scenario || (!epsilons && count > 0)) return fail(SMPC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::vector<double> grid(epsilons, epsilons + count);
    const auto rows = smpc::exp::run_sweep(scenario->file, grid, dir_or_none(out_dir));
    if (failed_rows) {
      *failed_rows = 0;
      for (const auto& r : rows)
        if (!r.ok) ++*failed_rows;
    }
  });
}

SMPC_API smpc_status smpc_bench(const smpc_scenario* tmpl, const size_t* sizes, size_t size_count,
                                const double* epsilons, size_t epsilon_count, const char* out_dir) {
  if (!tmpl || !sizes || !epsilons) return fail(SMPC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    smpc::exp::run_bench(tmpl->file, std::vector<std::size_t>(sizes, sizes + size_count),
                         std::vector<double>(epsilons, epsilons + epsilon_count), {},
                         dir_or_none(out_dir));
  });
}

SMPC_API smpc_status smpc_sinkhorn_solve(const double* cost, size_t n, size_t m, double epsilon,
                                         const double* a, const double* b, double threshold,
                                         long cap, double* coupling, long* iterations) {
  if (!cost || !coupling || n == 0 || m == 0) return fail(SMPC_ERR_INVALID_ARGUMENT, "bad argument");
  if ((a == nullptr) != (b == nullptr)) {
    return fail(SMPC_ERR_INVALID_ARGUMENT, "give both marginals or neither");
  }
  return guarded([&] {
    namespace ot = smpc::ot;
    const ot::CostMatrix c(n, m, std::vector<double>(cost, cost + n * m));
    const auto k = ot::gibbs_kernel(c, epsilon);
    ot::Marginals marg = ot::Marginals::uniform(n, m);
    if (a) {
      marg.a.assign(a, a + n);
      marg.b.assign(b, b + m);
      marg.validate();
    }
    const ot::RealVector ones(n, 1);
    const auto r = ot::sinkhorn_solve(k, marg, ones, ot::MarginalTolerance{threshold, cap});
    for (size_t i = 0; i < n * m; ++i) coupling[i] = static_cast<double>(r.coupling.p[i]);
    if (iterations) *iterations = r.iterations;
  });
}

SMPC_API smpc_status smpc_hungarian(const double* cost, size_t n, size_t* sigma,
                                    double* total_cost) {
  if (!cost || !sigma || n == 0) return fail(SMPC_ERR_INVALID_ARGUMENT, "bad argument");
  return guarded([&] {
    const smpc::ot::CostMatrix c(n, n, std::vector<double>(cost, cost + n * n));
    const auto a = smpc::hungarian(c);
    for (size_t i = 0; i < n; ++i) sigma[i] = a.sigma[i];
    if (total_cost) *total_cost = a.total_cost;
  });
}

}  // extern "C"
