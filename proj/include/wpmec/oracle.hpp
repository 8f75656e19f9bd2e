#pragma once

// Independent checks of solver output: an exhaustive grid search for tiny
// single-antenna instances, a KKT verifier and the monotonicity property of
// optimal local and AP execution.

#include <string>

#include "wpmec/model.hpp"
#include "wpmec/solver.hpp"

namespace wpmec {

struct OracleOptions {
  /// Intervals per grid dimension; every dimension is a fraction in [0, 1].
  int resolution = 128;
  /// 1 = single grid, 2 = one local refinement around the incumbent.
  int levels = 2;
};

struct OracleResult {
  Allocation allocation;
  double objective = 0.0;
  long points = 0;  // grid points evaluated over all levels
};

/// Exhaustive search over local and offloaded bits for M = 1 and K = 1
/// (N <= 3) or K = 2 (N <= 2). Every grid point satisfies task causality and
/// the deadlines by construction; for each point the AP schedule and the
/// transmit energies are optimal in closed form. Throws InvalidArgument
/// outside those sizes.
OracleResult brute_force_tiny(const Instance& inst, const OracleOptions& opts = {});

/// Minimum of sum_i tau q_i over q >= 0 with
/// sum_{j<=i} tau eta_k |h_{k,j}|^2 q_j >= demands(k, i), for M = 1.
/// Returns +inf when no q meets the demands.
double scalar_transmit_energy(const Instance& inst, const RMatrix& demands, RVector* q = nullptr);

/// Optimal AP execution of the offloaded bits: executes everything by the
/// deadline, never before arrival, with the cubic cost balanced over slots.
RVector optimal_server_schedule(const RMatrix& offload_bits);

struct KktReport {
  /// Every field is relative to the matching price or bit scale.
  double stationarity = 0.0;      // disagreement of the local, offload and AP optimality conditions
  double dual_sign = 0.0;         // negative causality multipliers
  double complementarity = 0.0;   // multiplier times slack, task and energy constraints
  double psd = 0.0;               // negative eigenvalue of Hbar at the recovered energy prices
  double beamforming = 0.0;       // transmit energy above the cheapest covariances for the same demands
  std::string worst_condition;
  DualPoint multipliers;          // recovered from the allocation and the beamforming SDP

  double worst() const;
  bool ok(double tol) const { return worst() <= tol; }
};

/// Recovers multipliers from the allocation itself: energy prices from the
/// beamforming SDP at the induced demands, task prices from the stationarity
/// of the positive bit variables. Then checks the remaining optimality
/// conditions of the scheme's problem.
KktReport verify_kkt(const Instance& inst, const SolveReport& report);

struct MonotonicityResult {
  bool pass = true;
  int user = -1;  // -1 for the AP
  int slot = -1;  // first slot whose value drops below its predecessor
  double drop = 0.0;
};

/// Local bits of every user and AP bits must be nondecreasing over slots
/// within tol_bits (default 1e-6 max(1, total arrivals)).
MonotonicityResult check_monotonicity(const SolveReport& report, double tol_bits = -1.0);

}  // namespace wpmec
