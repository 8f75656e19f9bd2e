#pragma once

// Joint solver: ellipsoid method on the dual, primal recovery from the
// closed-form minimizers, feasibility repair and beamforming recovery by SDP.
// The restricted variants reuse the same machinery.

#include <functional>
#include <string>
#include <vector>

#include "wpmec/dual.hpp"
#include "wpmec/ellipsoid.hpp"
#include "wpmec/energy.hpp"
#include "wpmec/model.hpp"
#include "wpmec/sdp.hpp"

namespace wpmec {

enum class Scheme { kJoint, kLocalOnly, kFullOffload, kMyopic, kSeparate };

/// "joint", "local-only", "full-offload", "myopic", "separate".
std::string to_string(Scheme scheme);
/// Throws InvalidArgument for an unknown name.
Scheme parse_scheme(const std::string& name);

struct SolveOptions {
  /// Relative primal-dual gap at which the dual iteration stops.
  double gap_tol = 1e-4;
  /// Absolute tolerance on the ellipsoid cut width.
  double tol = 1e-12;
  long max_iter = 3'000'000;
  double eps_lambda = kDefaultEpsLambda;
  double feas_tol = 1e-8;
  /// Deep objective and feasibility cuts; off by default, central cuts only.
  bool deep_cuts = false;
  /// Extra attempts with an enlarged initial ellipsoid when the first one
  /// converges without certifying the gap.
  int restarts = 3;
  long trace_stride = 0;
  SdpOptions sdp;
  /// Logging hook (level, message); levels follow 0 = debug .. 3 = error.
  std::function<void(int, const std::string&)> log;
};

struct PrimalBits {
  RVector server_bits;
  RMatrix local_bits;
  RMatrix offload_bits;
};

struct RepairInfo {
  bool applied = false;
  double magnitude = 0.0;  // total bits moved
  bool excessive = false;  // magnitude above 1% of the total arrivals
};

struct SolveReport {
  Scheme scheme = Scheme::kJoint;
  std::string status;  // "optimal", "suboptimal", "zero_load"
  Allocation allocation;
  double primal_objective = 0.0;
  /// Lower bound from the dual; NaN for schemes without one.
  double dual_value = 0.0;
  double duality_gap_rel = 0.0;
  ConstraintReport residuals;
  FeasibilityVerdict feasibility;
  long iterations = 0;
  double wall_time_s = 0.0;
  RepairInfo repair;
  bool has_dual = false;
  DualPoint dual;
  SdpStatus sdp_status = SdpStatus::kOptimal;
  std::vector<EllipsoidTraceRow> trace;
  std::vector<std::string> notes;
};

/// Closed-form subproblem minimizers at a dual point; R in the last slot is exactly zero and
/// variables excluded by the variant are zero.
PrimalBits recover_primal(const Instance& inst, const DualPoint& dual, Variant variant = Variant::kJoint);

/// Bits that are optimal for the energy and server prices of a dual point
/// under the exact task constraints: each user's allocation solves its nested
/// causality problem with the user-task multipliers eliminated, and the AP
/// then schedules the offloaded bits optimally. Feasible up to rounding.
/// Throws InfeasibleError when a user cannot meet its deadline in the variant.
PrimalBits price_consistent_bits(const Instance& inst, const DualPoint& dual, Variant variant = Variant::kJoint);

/// Makes bits exactly satisfy task causality and deadlines for users and the
/// AP. Monotone nondecreasing local and server sequences stay monotone.
/// Throws InfeasibleError when the variant cannot meet a deadline.
PrimalBits repair_feasibility(const Instance& inst, const PrimalBits& bits, Variant variant, RepairInfo* info = nullptr);

/// Assembles allocation, objective and residuals from repaired bits: solves
/// the beamforming SDP for the induced energy demands.
SolveReport evaluate_bits(const Instance& inst, const PrimalBits& bits, Scheme scheme, const SolveOptions& opts);

/// The joint scheme.
SolveReport solve(const Instance& inst, const SolveOptions& opts = {});

/// Joint, local-only or full-offload via the dual method.
SolveReport solve_dual_scheme(const Instance& inst, Variant variant, const SolveOptions& opts = {});

/// Dispatch over every scheme. Throws InfeasibleError when the scheme cannot
/// serve the instance and InvalidArgument when validation fails.
SolveReport solve_scheme(const Instance& inst, Scheme scheme, const SolveOptions& opts = {});

}  // namespace wpmec
