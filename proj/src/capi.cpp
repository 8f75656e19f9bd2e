#include "wpmec/wpmec.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "wpmec/errors.hpp"
#include "wpmec/experiments.hpp"
#include "wpmec/io.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/solver.hpp"

struct wpmec_instance {
  wpmec::Instance inst;
};

struct wpmec_options {
  wpmec::SolveOptions opts;
  wpmec_log_fn log = nullptr;
  void* log_user = nullptr;
};

struct wpmec_report {
  wpmec::Instance inst;  // kept for the KKT verifier
  wpmec::SolveReport report;
  std::optional<wpmec::KktReport> kkt;
};

struct wpmec_sweep_config {
  wpmec::ExperimentConfig cfg;
};

struct wpmec_sweep_result {
  wpmec::SweepResult result;
  std::vector<std::string> scheme_names;
};

namespace {

thread_local std::string last_error;

wpmec_status fail(wpmec_status status, const std::string& message) {
  last_error = message;
  return status;
}

wpmec_status status_of(wpmec::ErrorCode code) {
  switch (code) {
    case wpmec::ErrorCode::kInvalidArgument: return WPMEC_INVALID_ARGUMENT;
    case wpmec::ErrorCode::kParse: return WPMEC_PARSE;
    case wpmec::ErrorCode::kInfeasible: return WPMEC_INFEASIBLE;
    case wpmec::ErrorCode::kNumerical: return WPMEC_NUMERICAL;
    case wpmec::ErrorCode::kIo: return WPMEC_IO;
  }
  return WPMEC_INTERNAL;
}

// Runs body and maps every exception onto a status code.
template <typename F>
wpmec_status guarded(F&& body) {
  try {
    body();
    return WPMEC_OK;
  } catch (const wpmec::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(WPMEC_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WPMEC_INTERNAL, e.what());
  } catch (...) {
    return fail(WPMEC_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define WPMEC_REQUIRE(cond, what) \
  if (!(cond)) return fail(WPMEC_INVALID_ARGUMENT, what)

wpmec::SolveOptions solve_options(const wpmec_options* o) {
  if (!o) return {};
  wpmec::SolveOptions opts = o->opts;
  if (o->log) {
    wpmec_log_fn fn = o->log;
    void* user = o->log_user;
    opts.log = [fn, user](int level, const std::string& msg) { fn(level, msg.c_str(), user); };
  }
  return opts;
}

}  // namespace

extern "C" {

const char* wpmec_version(void) { return "0.1.0"; }

const char* wpmec_status_name(wpmec_status status) {
  switch (status) {
    case WPMEC_OK: return "ok";
    case WPMEC_INVALID_ARGUMENT: return "invalid_argument";
    case WPMEC_PARSE: return "parse";
    case WPMEC_INFEASIBLE: return "infeasible";
    case WPMEC_NUMERICAL: return "numerical";
    case WPMEC_IO: return "io";
    case WPMEC_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* wpmec_last_error(void) { return last_error.c_str(); }

void wpmec_string_free(char* s) { std::free(s); }

wpmec_status wpmec_instance_from_json(const char* text, wpmec_instance** out) {
  WPMEC_REQUIRE(text && out, "null argument");
  return guarded([&] { *out = new wpmec_instance{wpmec::instance_from_json(text)}; });
}

wpmec_status wpmec_instance_load(const char* path, wpmec_instance** out) {
  WPMEC_REQUIRE(path && out, "null argument");
  return guarded([&] {
    const std::string text = wpmec::read_file(path);
    try {
      *out = new wpmec_instance{wpmec::instance_from_json(text)};
    } catch (const wpmec::ParseError& e) {
      throw wpmec::ParseError(std::string(path) + ": " + e.what());
    }
  });
}

wpmec_status wpmec_instance_generate(const wpmec_sweep_config* cfg, uint64_t seed, wpmec_instance** out) {
  WPMEC_REQUIRE(cfg && out, "null argument");
  return guarded([&] { *out = new wpmec_instance{wpmec::gen_instance(cfg->cfg, seed)}; });
}

wpmec_status wpmec_instance_to_json(const wpmec_instance* inst, char** out) {
  WPMEC_REQUIRE(inst && out, "null argument");
  return guarded([&] { *out = dup_string(wpmec::instance_to_json(inst->inst)); });
}

wpmec_status wpmec_instance_validate(const wpmec_instance* inst, int* ok, char** report_json) {
  WPMEC_REQUIRE(inst && ok, "null argument");
  return guarded([&] {
    const wpmec::ValidationReport vr = wpmec::validate_instance(inst->inst);
    *ok = vr.ok() ? 1 : 0;
    if (report_json) *report_json = dup_string(wpmec::validation_to_json(vr));
  });
}

void wpmec_instance_free(wpmec_instance* inst) { delete inst; }

wpmec_status wpmec_options_create(wpmec_options** out) {
  WPMEC_REQUIRE(out, "null argument");
  return guarded([&] { *out = new wpmec_options{}; });
}

wpmec_status wpmec_options_set_gap_tol(wpmec_options* opts, double gap_tol) {
  WPMEC_REQUIRE(opts, "null argument");
  WPMEC_REQUIRE(gap_tol > 0.0 && std::isfinite(gap_tol), "gap tolerance must be positive");
  opts->opts.gap_tol = gap_tol;
  return WPMEC_OK;
}

wpmec_status wpmec_options_set_max_iter(wpmec_options* opts, long max_iter) {
  WPMEC_REQUIRE(opts, "null argument");
  WPMEC_REQUIRE(max_iter > 0, "max_iter must be positive");
  opts->opts.max_iter = max_iter;
  return WPMEC_OK;
}

wpmec_status wpmec_options_set_log(wpmec_options* opts, wpmec_log_fn fn, void* user) {
  WPMEC_REQUIRE(opts, "null argument");
  opts->log = fn;
  opts->log_user = user;
  return WPMEC_OK;
}

void wpmec_options_free(wpmec_options* opts) { delete opts; }

wpmec_status wpmec_solve(const wpmec_instance* inst, const char* scheme, const wpmec_options* opts,
                         wpmec_report** out) {
  WPMEC_REQUIRE(inst && scheme && out, "null argument");
  return guarded([&] {
    const wpmec::Scheme s = wpmec::parse_scheme(scheme);
    auto rep = std::make_unique<wpmec_report>();
    rep->inst = inst->inst;
    rep->report = wpmec::solve_scheme(rep->inst, s, solve_options(opts));
    *out = rep.release();
  });
}

double wpmec_report_objective(const wpmec_report* report) {
  return report ? report->report.primal_objective : std::numeric_limits<double>::quiet_NaN();
}

double wpmec_report_dual_value(const wpmec_report* report) {
  return report ? report->report.dual_value : std::numeric_limits<double>::quiet_NaN();
}

double wpmec_report_gap(const wpmec_report* report) {
  return report ? report->report.duality_gap_rel : std::numeric_limits<double>::quiet_NaN();
}

int wpmec_report_feasible(const wpmec_report* report) {
  return report && report->report.feasibility.feasible ? 1 : 0;
}

wpmec_status wpmec_report_check_kkt(wpmec_report* report, double* worst) {
  WPMEC_REQUIRE(report, "null argument");
  return guarded([&] {
    report->kkt = wpmec::verify_kkt(report->inst, report->report);
    if (worst) *worst = report->kkt->worst();
  });
}

wpmec_status wpmec_report_to_json(const wpmec_report* report, char** out) {
  WPMEC_REQUIRE(report && out, "null argument");
  return guarded([&] {
    *out = dup_string(wpmec::report_to_json(report->report, report->kkt ? &*report->kkt : nullptr));
  });
}

void wpmec_report_free(wpmec_report* report) { delete report; }

wpmec_status wpmec_sweep_config_default(wpmec_sweep_config** out) {
  WPMEC_REQUIRE(out, "null argument");
  return guarded([&] { *out = new wpmec_sweep_config{}; });
}

wpmec_status wpmec_sweep_config_from_json(const char* text, wpmec_sweep_config** out) {
  WPMEC_REQUIRE(text && out, "null argument");
  return guarded([&] { *out = new wpmec_sweep_config{wpmec::config_from_json(text)}; });
}

wpmec_status wpmec_sweep_config_load(const char* path, wpmec_sweep_config** out) {
  WPMEC_REQUIRE(path && out, "null argument");
  return guarded([&] {
    const std::string text = wpmec::read_file(path);
    try {
      *out = new wpmec_sweep_config{wpmec::config_from_json(text)};
    } catch (const wpmec::ParseError& e) {
      throw wpmec::ParseError(std::string(path) + ": " + e.what());
    }
  });
}

wpmec_status wpmec_sweep_config_set_seed(wpmec_sweep_config* cfg, uint64_t seed) {
  WPMEC_REQUIRE(cfg, "null argument");
  cfg->cfg.seed = seed;
  return WPMEC_OK;
}

wpmec_status wpmec_sweep_config_set_trials(wpmec_sweep_config* cfg, int trials) {
  WPMEC_REQUIRE(cfg, "null argument");
  WPMEC_REQUIRE(trials >= 1, "trials must be >= 1");
  cfg->cfg.trials = trials;
  return WPMEC_OK;
}

wpmec_status wpmec_sweep_config_set_threads(wpmec_sweep_config* cfg, int threads) {
  WPMEC_REQUIRE(cfg, "null argument");
  WPMEC_REQUIRE(threads >= 1, "threads must be >= 1");
  cfg->cfg.threads = threads;
  return WPMEC_OK;
}

wpmec_status wpmec_sweep_config_set_axis(wpmec_sweep_config* cfg, const char* axis, const double* values,
                                         size_t count) {
  WPMEC_REQUIRE(cfg && axis && (values || count == 0), "null argument");
  const std::string a = axis;
  WPMEC_REQUIRE(a == "K" || a == "A_max", "axis must be K or A_max");
  WPMEC_REQUIRE(count > 0, "axis needs at least one value");
  cfg->cfg.axis = a;
  cfg->cfg.values.assign(values, values + count);
  return WPMEC_OK;
}

wpmec_status wpmec_sweep_config_set_options(wpmec_sweep_config* cfg, const wpmec_options* opts) {
  WPMEC_REQUIRE(cfg && opts, "null argument");
  cfg->cfg.solver = solve_options(opts);
  return WPMEC_OK;
}

wpmec_status wpmec_sweep_config_to_json(const wpmec_sweep_config* cfg, char** out) {
  WPMEC_REQUIRE(cfg && out, "null argument");
  return guarded([&] { *out = dup_string(wpmec::config_to_json(cfg->cfg)); });
}

void wpmec_sweep_config_free(wpmec_sweep_config* cfg) { delete cfg; }

wpmec_status wpmec_sweep_run(const wpmec_sweep_config* cfg, wpmec_progress_fn progress, void* user,
                             wpmec_sweep_result** out) {
  WPMEC_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    wpmec::SweepProgress cb;
    if (progress) cb = [progress, user](int done, int total) { progress(done, total, user); };
    auto res = std::make_unique<wpmec_sweep_result>();
    res->result = wpmec::run_sweep(cfg->cfg, cb);
    for (const auto& c : res->result.cells) res->scheme_names.push_back(wpmec::to_string(c.scheme));
    *out = res.release();
  });
}

size_t wpmec_sweep_result_cells(const wpmec_sweep_result* result) {
  return result ? result->result.cells.size() : 0;
}

wpmec_status wpmec_sweep_result_cell(const wpmec_sweep_result* result, size_t index, double* axis_value,
                                     const char** scheme, double* mean_j_per_slot, double* stderr_j_per_slot,
                                     int* n_ok, int* n_infeasible) {
  WPMEC_REQUIRE(result, "null argument");
  WPMEC_REQUIRE(index < result->result.cells.size(), "cell index out of range");
  const auto& c = result->result.cells[index];
  if (axis_value) *axis_value = c.axis_value;
  if (scheme) *scheme = result->scheme_names[index].c_str();
  if (mean_j_per_slot) *mean_j_per_slot = c.mean_j_per_slot;
  if (stderr_j_per_slot) *stderr_j_per_slot = c.stderr_j_per_slot;
  if (n_ok) *n_ok = c.n_ok;
  if (n_infeasible) *n_infeasible = c.n_infeasible;
  return WPMEC_OK;
}

wpmec_status wpmec_sweep_result_csv(const wpmec_sweep_result* result, char** out) {
  WPMEC_REQUIRE(result && out, "null argument");
  return guarded([&] { *out = dup_string(wpmec::sweep_csv(result->result)); });
}

wpmec_status wpmec_sweep_result_emit(const wpmec_sweep_result* result, const char* out_dir, int log_y) {
  WPMEC_REQUIRE(result && out_dir, "null argument");
  return guarded([&] { wpmec::emit_outputs(result->result, out_dir, log_y != 0); });
}

void wpmec_sweep_result_free(wpmec_sweep_result* result) { delete result; }

}  // extern "C"
