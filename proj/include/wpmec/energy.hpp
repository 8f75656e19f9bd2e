#pragma once

// Energy formulas and constraint residuals of the joint energy minimization
// problem. All functions are pure.

#include <span>
#include <string>

#include "wpmec/model.hpp"

namespace wpmec {

/// DVFS energy of executing `bits` within one slot: zeta C^3 L^3 / tau^2.
double local_energy(double capacitance, double cycles_per_bit, double bits, double tau);

/// Uplink transmit energy for `bits` in one slot over an FDMA band:
/// (tau sigma^2 / g) (2^{R / (tau B)} - 1).
double offload_energy(double gain, double bits, double tau, double bandwidth, double noise_power);

/// Energy harvested in one slot: tau eta h^H Q h.
double harvested_energy(const CMatrix& covariance, const CVector& channel, double efficiency, double tau);

/// Server computing energy summed over slots.
double server_energy(double capacitance, double cycles_per_bit, std::span<const double> bits, double tau);

/// AP energy over the horizon: sum_i tau tr(Q_i) + server computing energy.
double objective(const Instance& inst, const Allocation& alloc);

/// Signed constraint residuals; causality entries are feasible when >= 0,
/// equality entries when == 0.
struct ConstraintReport {
  RMatrix user_task_causality;  // K x N, sum_{j<=i} (A - L - R); last column equals the deadline residual
  RVector user_deadline;        // K
  RVector ap_task_causality;    // N, sum_{j<i} sum_k R - sum_{j<=i} L0
  double ap_deadline = 0.0;
  RMatrix energy_causality;     // K x N, cumulative harvested minus consumed
  RVector last_slot_offload;    // K, R_{k,N-1}
  double min_bits = 0.0;        // smallest entry over L, R, L0 (negative means violated)
  double min_covariance_eig = 0.0;
  double max_covariance_asymmetry = 0.0;
  double max_covariance_trace = 0.0;
  double bits_scale = 1.0;      // max(1, sum A)
  double energy_scale = 0.0;    // largest cumulative consumed or harvested energy
};

ConstraintReport residuals(const Instance& inst, const Allocation& alloc);

struct FeasibilityTolerance {
  double causality_rel = 1e-9;  // multiplied by the matching scale
  double equality_rel = 1e-9;   // multiplied by bits_scale
  double psd_rel = 1e-10;       // multiplied by max tr(Q_i)
};

struct FeasibilityVerdict {
  bool feasible = true;
  std::string first_violation;
  double worst_bits_slack = 0.0;
  double worst_energy_slack = 0.0;
  double worst_equality = 0.0;
};

FeasibilityVerdict check_feasibility(const ConstraintReport& report, const FeasibilityTolerance& tol = {});

}  // namespace wpmec
