#pragma once

// Random instance generation and Monte-Carlo sweeps over the user count or
// the maximum task size.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wpmec/model.hpp"
#include "wpmec/solver.hpp"

namespace wpmec {

struct ExperimentConfig {
  int M = 4;
  int K = 6;
  int N = 10;
  double tau = 0.1;
  double B = 2e6;
  double sigma2 = 1e-9;
  double eta = 0.3;
  double C0 = 1e3;
  double Ck = 1e3;
  double zeta0 = 1e-29;
  double zetak = 1e-28;
  double pathloss_ref_db = -32.0;
  double pathloss_exponent = 3.0;
  /// Per-user distances in meters; users beyond the list use the last entry.
  std::vector<double> distances{4.0};
  double A_min = 1e5;
  double A_max = 1e6;
  /// When false no task arrives in the last slot, which keeps the
  /// full-offloading scheme feasible.
  bool final_slot_arrivals = true;
  /// "mrc": squared norm of an M-vector; "scalar": one Rayleigh draw scaled to the same mean.
  std::string uplink_model = "mrc";
  int trials = 500;
  std::uint64_t seed = 1;
  std::string axis = "K";  // "K" or "A_max"
  std::vector<double> values{2, 4, 6, 8};
  std::vector<Scheme> schemes{Scheme::kJoint, Scheme::kLocalOnly, Scheme::kFullOffload, Scheme::kMyopic,
                              Scheme::kSeparate};
  bool log_y = false;
  int threads = 1;
  SolveOptions solver;
};

/// Throws InvalidArgument listing the first violated constraint.
void validate_config(const ExperimentConfig& cfg);

/// Deterministic seed of one trial, derived from (seed, axis index, trial index).
std::uint64_t trial_seed(std::uint64_t seed, int axis_index, int trial_index);

double pathloss(const ExperimentConfig& cfg, double distance);

/// One random instance for cfg.K users; bit-identical for equal inputs.
Instance gen_instance(const ExperimentConfig& cfg, std::uint64_t seed);

/// cfg with the sweep axis set to `value`.
ExperimentConfig at_axis_value(const ExperimentConfig& cfg, double value);

struct SweepCell {
  double axis_value = 0.0;
  Scheme scheme = Scheme::kJoint;
  double mean_j_per_slot = 0.0;
  double stderr_j_per_slot = 0.0;
  int n_ok = 0;
  int n_infeasible = 0;
  std::vector<std::string> failures;  // one reason per excluded trial
};

struct SweepResult {
  std::string axis_name;
  std::vector<SweepCell> cells;  // axis-major, schemes in configuration order

  const SweepCell* find(double axis_value, Scheme scheme) const;
};

/// Optional progress callback: (finished work items, total work items).
using SweepProgress = std::function<void(int, int)>;

SweepResult run_sweep(const ExperimentConfig& cfg, const SweepProgress& progress = {});

std::string sweep_csv(const SweepResult& result);
SweepResult parse_sweep_csv(const std::string& text);
std::string sweep_svg(const SweepResult& result, bool log_y);

/// Writes sweep.csv and sweep.svg into out_dir (created if missing).
void emit_outputs(const SweepResult& result, const std::string& out_dir, bool log_y = false);

}  // namespace wpmec
