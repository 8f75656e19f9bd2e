#pragma once

// Energy beamforming recovery: the smallest transmit energy that delivers
// prescribed cumulative harvested energy to every user,
//
//   min  sum_i tau tr(Q_i)
//   s.t. sum_{j<=i} tau eta_k h_{k,j}^H Q_j h_{k,j} >= D_{k,i}   for all k, i
//        Q_i PSD,
//
// solved by a primal barrier method.

#include <string>
#include <vector>

#include "wpmec/model.hpp"

namespace wpmec {

/// Cumulative user energy demand D_{k,i} = sum_{j<=i} (local + offload energy).
RMatrix energy_demands(const Instance& inst, const RMatrix& local_bits, const RMatrix& offload_bits);

struct SdpOptions {
  double target_gap_rel = 1e-10;
  double barrier_factor = 10.0;
  int max_newton_per_round = 100;
  int max_rounds = 60;
};

enum class SdpStatus { kOptimal, kZeroDemand, kNumerical };

std::string to_string(SdpStatus status);

struct SdpResult {
  SdpStatus status = SdpStatus::kOptimal;
  std::vector<CMatrix> covariance;
  double objective = 0.0;       // sum_i tau tr(Q_i)
  double dual_objective = 0.0;  // sum y D, a lower bound at a central point
  double gap_rel = 0.0;
  RMatrix multipliers;          // y_{k,i} >= 0, K x N
  int newton_steps = 0;
  int rounds = 0;
  std::string message;
};

/// Throws InfeasibleError when a positive demand faces a zero cumulative
/// downlink channel and InvalidArgument on a malformed demand array.
SdpResult solve_wpt_sdp(const Instance& inst, const RMatrix& demands, const SdpOptions& opts = {});

/// Optimality report for a candidate covariance sequence. Multipliers are
/// recovered by nonnegative least squares from Z_j Q_j = 0 over the nearly
/// active constraints, where Z_j = tau I - sum_{k, i>=j} y_{k,i} tau eta_k h h^H.
/// Every field is relative (dimensionless).
struct SdpKktReport {
  double primal_violation = 0.0;     // max (D - harvested)^+ / max D
  double psd_violation = 0.0;        // max (-min eig Q_j)^+ / max tr Q_j
  double dual_infeasibility = 0.0;   // max (-min eig Z_j)^+ / tau
  double complementarity = 0.0;      // max(|y s|, |tr Z Q|) / objective
  double stationarity = 0.0;         // max ||Z_j Q_j||_F / (tau max ||Q_j||_F)
  RVector min_eig_q;
  RVector min_eig_z;
  RMatrix multipliers;

  double worst() const;
  bool ok(double tol) const { return worst() <= tol; }
};

SdpKktReport sdp_kkt_residuals(const Instance& inst, const RMatrix& demands, const std::vector<CMatrix>& covariance);

}  // namespace wpmec
