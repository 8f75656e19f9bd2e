// Command-line front end; talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wpmec/wpmec.h"

namespace {

int g_log_level = WPMEC_LOG_WARN;

const char* level_name(int level) {
  switch (level) {
    case WPMEC_LOG_DEBUG: return "debug";
    case WPMEC_LOG_INFO: return "info";
    case WPMEC_LOG_WARN: return "warn";
    default: return "error";
  }
}

void log_line(int level, const std::string& msg) {
  if (level >= g_log_level) std::fprintf(stderr, "[%s] %s\n", level_name(level), msg.c_str());
}

void log_cb(int level, const char* msg, void*) { log_line(level, msg); }

// Owns a string returned by the library.
struct Str {
  char* p = nullptr;
  ~Str() { wpmec_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

int report_error(wpmec_status st) {
  std::fprintf(stderr, "error (%s): %s\n", wpmec_status_name(st), wpmec_last_error());
  return 1;
}

bool write_output(const std::string& path, const std::string& body) {
  if (path.empty()) {
    std::fwrite(body.data(), 1, body.size(), stdout);
    std::fputc('\n', stdout);
    return true;
  }
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    std::fprintf(stderr, "error (io): cannot open %s for writing\n", path.c_str());
    return false;
  }
  std::fwrite(body.data(), 1, body.size(), f);
  std::fputc('\n', f);
  std::fclose(f);
  return true;
}

struct SolverFlags {
  double tol = 0.0;
  long max_iter = 0;
};

// Options handle with the shared solver flags applied; null on failure.
wpmec_options* make_options(const SolverFlags& flags) {
  wpmec_options* opts = nullptr;
  if (wpmec_options_create(&opts) != WPMEC_OK) return nullptr;
  wpmec_options_set_log(opts, log_cb, nullptr);
  if (flags.tol > 0.0 && wpmec_options_set_gap_tol(opts, flags.tol) != WPMEC_OK) {
    wpmec_options_free(opts);
    return nullptr;
  }
  if (flags.max_iter > 0 && wpmec_options_set_max_iter(opts, flags.max_iter) != WPMEC_OK) {
    wpmec_options_free(opts);
    return nullptr;
  }
  return opts;
}

int cmd_solve(const std::string& path, const std::string& scheme, const SolverFlags& flags, bool check_kkt,
              const std::string& out) {
  wpmec_instance* inst = nullptr;
  if (wpmec_status st = wpmec_instance_load(path.c_str(), &inst); st != WPMEC_OK) return report_error(st);
  wpmec_options* opts = make_options(flags);
  if (!opts) {
    wpmec_instance_free(inst);
    return report_error(WPMEC_INVALID_ARGUMENT);
  }
  wpmec_report* rep = nullptr;
  const wpmec_status st = wpmec_solve(inst, scheme.c_str(), opts, &rep);
  wpmec_options_free(opts);
  wpmec_instance_free(inst);
  if (st == WPMEC_INFEASIBLE) {
    std::fprintf(stderr, "infeasible: %s\n", wpmec_last_error());
    return 2;
  }
  if (st != WPMEC_OK) return report_error(st);
  int code = 0;
  if (check_kkt) {
    double worst = 0.0;
    if (wpmec_status kst = wpmec_report_check_kkt(rep, &worst); kst != WPMEC_OK) {
      code = report_error(kst);
    } else {
      log_line(WPMEC_LOG_INFO, "worst relative KKT residual " + std::to_string(worst));
    }
  }
  Str json;
  if (wpmec_status jst = wpmec_report_to_json(rep, &json.p); jst != WPMEC_OK) code = report_error(jst);
  log_line(WPMEC_LOG_INFO, scheme + ": objective " + std::to_string(wpmec_report_objective(rep)) + " J, gap " +
                               std::to_string(wpmec_report_gap(rep)));
  if (!wpmec_report_feasible(rep)) log_line(WPMEC_LOG_WARN, "reported allocation fails the feasibility check");
  wpmec_report_free(rep);
  if (code == 0 && !write_output(out, json.str())) code = 1;
  return code;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void progress_cb(int done, int total, void*) {
  if (g_log_level <= WPMEC_LOG_INFO) std::fprintf(stderr, "\r[info] %d/%d trials", done, total);
  if (g_log_level <= WPMEC_LOG_INFO && done == total) std::fputc('\n', stderr);
}

int cmd_sweep(const std::string& config, const std::string& out_dir, const std::string& axis,
              const std::string& values, int trials, long long seed, int threads, const SolverFlags& flags,
              bool log_y) {
  wpmec_sweep_config* cfg = nullptr;
  if (wpmec_status st = wpmec_sweep_config_load(config.c_str(), &cfg); st != WPMEC_OK) return report_error(st);
  auto cleanup = [&](int code) {
    wpmec_sweep_config_free(cfg);
    return code;
  };
  if (!axis.empty() || !values.empty()) {
    if (axis.empty() || values.empty()) {
      std::fprintf(stderr, "error: --axis and --values go together\n");
      return cleanup(1);
    }
    std::vector<double> v;
    try {
      v = parse_values(values);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: --values must be a comma separated list of numbers\n");
      return cleanup(1);
    }
    if (wpmec_status st = wpmec_sweep_config_set_axis(cfg, axis.c_str(), v.data(), v.size()); st != WPMEC_OK)
      return cleanup(report_error(st));
  }
  if (trials > 0 && wpmec_sweep_config_set_trials(cfg, trials) != WPMEC_OK) return cleanup(report_error(WPMEC_INVALID_ARGUMENT));
  if (seed >= 0) wpmec_sweep_config_set_seed(cfg, static_cast<uint64_t>(seed));
  if (threads > 0 && wpmec_sweep_config_set_threads(cfg, threads) != WPMEC_OK)
    return cleanup(report_error(WPMEC_INVALID_ARGUMENT));
  if (flags.tol > 0.0 || flags.max_iter > 0) {
    wpmec_options* opts = make_options(flags);
    if (!opts) return cleanup(report_error(WPMEC_INVALID_ARGUMENT));
    wpmec_sweep_config_set_options(cfg, opts);
    wpmec_options_free(opts);
  }
  wpmec_sweep_result* res = nullptr;
  if (wpmec_status st = wpmec_sweep_run(cfg, progress_cb, nullptr, &res); st != WPMEC_OK)
    return cleanup(report_error(st));
  int code = 0;
  if (wpmec_status st = wpmec_sweep_result_emit(res, out_dir.c_str(), log_y ? 1 : 0); st != WPMEC_OK) {
    code = report_error(st);
  } else {
    std::printf("%-10s %-13s %16s %14s %6s %12s\n", "axis", "scheme", "mean J/slot", "stderr", "ok", "infeasible");
    for (std::size_t i = 0; i < wpmec_sweep_result_cells(res); ++i) {
      double x = 0, mean = 0, se = 0;
      const char* scheme = nullptr;
      int ok = 0, bad = 0;
      wpmec_sweep_result_cell(res, i, &x, &scheme, &mean, &se, &ok, &bad);
      std::printf("%-10g %-13s %16.8g %14.4g %6d %12d\n", x, scheme, mean, se, ok, bad);
    }
    log_line(WPMEC_LOG_INFO, "wrote " + out_dir + "/sweep.csv and " + out_dir + "/sweep.svg");
  }
  wpmec_sweep_result_free(res);
  return cleanup(code);
}

int cmd_validate(const std::string& path) {
  wpmec_instance* inst = nullptr;
  if (wpmec_status st = wpmec_instance_load(path.c_str(), &inst); st != WPMEC_OK) return report_error(st);
  int ok = 0;
  Str json;
  const wpmec_status st = wpmec_instance_validate(inst, &ok, &json.p);
  wpmec_instance_free(inst);
  if (st != WPMEC_OK) return report_error(st);
  std::printf("%s\n", json.str().c_str());
  return ok ? 0 : 1;
}

int cmd_generate(const std::string& config, long long seed, const std::string& out) {
  wpmec_sweep_config* cfg = nullptr;
  wpmec_status st = config.empty() ? wpmec_sweep_config_default(&cfg) : wpmec_sweep_config_load(config.c_str(), &cfg);
  if (st != WPMEC_OK) return report_error(st);
  wpmec_instance* inst = nullptr;
  st = wpmec_instance_generate(cfg, static_cast<uint64_t>(seed < 0 ? 1 : seed), &inst);
  wpmec_sweep_config_free(cfg);
  if (st != WPMEC_OK) return report_error(st);
  Str json;
  st = wpmec_instance_to_json(inst, &json.p);
  wpmec_instance_free(inst);
  if (st != WPMEC_OK) return report_error(st);
  return write_output(out, json.str()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-minimal resource allocation for wireless-powered mobile edge computing"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", wpmec_version());

  std::string log_level = "warn";
  const std::map<std::string, int> levels{
      {"debug", WPMEC_LOG_DEBUG}, {"info", WPMEC_LOG_INFO}, {"warn", WPMEC_LOG_WARN}, {"error", WPMEC_LOG_ERROR}};
  app.add_option("--log-level", log_level, "debug, info, warn or error")
      ->envname("WPMEC_LOG_LEVEL")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  SolverFlags flags;
  std::string out;
  long long seed = -1;
  int trials = 0;

  auto* solve = app.add_subcommand("solve", "Solve one instance and print the report as JSON");
  std::string instance_path, scheme = "joint";
  bool check_kkt = false;
  solve->add_option("instance", instance_path, "Instance JSON file")->required();
  solve->add_option("--scheme", scheme, "joint, local-only, full-offload, myopic or separate")
      ->envname("WPMEC_SCHEME")
      ->check(CLI::IsMember({"joint", "local-only", "full-offload", "myopic", "separate"}));
  solve->add_option("--tol", flags.tol, "Relative duality gap at which the solver stops")->envname("WPMEC_TOL");
  solve->add_option("--max-iter", flags.max_iter, "Ellipsoid iteration cap")->envname("WPMEC_MAX_ITER");
  solve->add_option("--seed", seed, "Accepted for uniformity; solving is deterministic")->envname("WPMEC_SEED");
  solve->add_flag("--check-kkt", check_kkt, "Verify the optimality conditions and include them in the report");
  solve->add_option("--out", out, "Report file (default: stdout)")->envname("WPMEC_OUT");

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep; writes sweep.csv and sweep.svg");
  std::string config_path, axis, values;
  int threads = 0;
  bool log_y = false;
  std::string out_dir = ".";
  sweep->add_option("config", config_path, "Experiment config JSON file")->required();
  sweep->add_option("--out", out_dir, "Output directory")->envname("WPMEC_OUT");
  sweep->add_option("--axis", axis, "K or A_max")->check(CLI::IsMember({"K", "A_max"}));
  sweep->add_option("--values", values, "Comma separated axis values, e.g. 2,4,6,8");
  sweep->add_option("--trials", trials, "Trials per axis value")->envname("WPMEC_TRIALS");
  sweep->add_option("--seed", seed, "Base seed")->envname("WPMEC_SEED");
  sweep->add_option("--threads", threads, "Worker threads")->envname("WPMEC_THREADS");
  sweep->add_option("--tol", flags.tol, "Relative duality gap at which the solver stops")->envname("WPMEC_TOL");
  sweep->add_option("--max-iter", flags.max_iter, "Ellipsoid iteration cap")->envname("WPMEC_MAX_ITER");
  sweep->add_flag("--log-y", log_y, "Logarithmic energy axis in the SVG");

  auto* validate = app.add_subcommand("validate", "Check an instance file");
  std::string validate_path;
  validate->add_option("instance", validate_path, "Instance JSON file")->required();

  auto* generate = app.add_subcommand("generate", "Draw a random instance from an experiment config");
  std::string gen_config;
  std::string gen_out;
  generate->add_option("--config", gen_config, "Experiment config JSON file (default: built-in defaults)");
  generate->add_option("--seed", seed, "Instance seed")->envname("WPMEC_SEED");
  generate->add_option("--out", gen_out, "Instance file (default: stdout)")->envname("WPMEC_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  g_log_level = levels.at(log_level);

  if (*solve) return cmd_solve(instance_path, scheme, flags, check_kkt, out);
  if (*sweep) return cmd_sweep(config_path, out_dir, axis, values, trials, seed, threads, flags, log_y);
  if (*validate) return cmd_validate(validate_path);
  if (*generate) return cmd_generate(gen_config, seed, gen_out);
  return 1;
}
