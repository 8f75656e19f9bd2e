#pragma once

// Lagrange dual decomposition of the joint problem.
//
// The partial Lagrangian dualizes user task causality/deadline (mu), AP task
// causality/deadline (nu) and energy causality (lambda). For a fixed dual
// point it separates into per-slot and per-user scalar problems with closed
// form minimizers; the covariance subproblem contributes 0 when every
// Hbar_i is PSD and -inf otherwise, so Q* = 0 is used for evaluation.
//
// Flattened dual vectors are laid out as
//   [ lambda(k,i) for k, i ] [ mu(k,i) for k, i ] [ nu(i) for i ]
// with k major. The nu block is absent for the local-only variant.

#include <vector>

#include "wpmec/model.hpp"

namespace wpmec {

/// Which primal variables participate. Restricted variants pin the excluded
/// bit variables to zero.
enum class Variant {
  kJoint,        // L0, L, R free
  kLocalOnly,    // R = 0, L0 = 0
  kFullOffload,  // L = 0
};

inline constexpr double kDefaultEpsLambda = 1e-12;

// Closed-form minimizers, expressed on aggregated multiplier sums so they can
// be exercised directly.

/// argmin_{L0>=0} zeta0 C0^3 L0^3 / tau^2 + V L0, with V = sum_{j>=i} nu_j.
double server_bits_minimizer(double suffix_server_price, double tau, double capacitance, double cycles_per_bit);

/// argmin_{L>=0} Lambda zeta C^3 L^3 / tau^2 + M L, with Lambda = sum_{j>=i} lambda_{k,j}
/// and M = sum_{j>=i} mu_{k,j}.
double local_bits_minimizer(double suffix_user_price, double suffix_energy_price, double tau, double capacitance,
                            double cycles_per_bit);

/// argmin_{R>=0} Lambda (tau sigma^2 / g)(2^{R/(tau B)} - 1) - P R, where P is the
/// net offloading price sum_{j>i} nu_j - sum_{j>=i} mu_{k,j}.
/// Stationarity gives 2^{R/(tau B)} = P B g / (Lambda sigma^2 ln 2).
double offload_bits_minimizer(double offload_price, double suffix_energy_price, double gain, double tau,
                              double bandwidth, double noise_power);

struct SubproblemMinimizers {
  RVector server_bits;   // L0*
  RMatrix local_bits;    // L*
  RMatrix offload_bits;  // R*, last column always zero
};

struct DualEvaluation {
  double value = 0.0;
  SubproblemMinimizers minimizers;
  RVector subgradient;
};

enum class DualCutKind { kNone, kSign, kSuffixSum, kPsd };

struct DualCheck {
  bool feasible = true;
  DualCutKind kind = DualCutKind::kNone;
  /// Gradient of the violated constraint; the feasible set lies in
  /// { y : direction . (y - x) >= depth }.
  RVector direction;
  double depth = 0.0;
  int user = -1;
  int slot = -1;
};

/// Precomputed data for repeated evaluation of the dual at one instance.
class DualProblem {
 public:
  explicit DualProblem(const Instance& inst, Variant variant = Variant::kJoint,
                       double eps_lambda = kDefaultEpsLambda);

  const Instance& instance() const { return *inst_; }
  Variant variant() const { return variant_; }
  double eps_lambda() const { return eps_lambda_; }

  int dimension() const;
  bool has_server_block() const { return variant_ != Variant::kLocalOnly; }

  RVector flatten(const DualPoint& dual) const;
  DualPoint unflatten(const RVector& x) const;

  DualCheck check(const RVector& x) const;
  SubproblemMinimizers minimize(const RVector& x) const;
  double value(const RVector& x, const SubproblemMinimizers& z) const;
  RVector subgradient(const SubproblemMinimizers& z) const;
  DualEvaluation evaluate(const RVector& x) const;

  /// Lower bound on the dual function over the whole box used by the solver:
  /// lambda_{k,i} <= min_{j<=i} 1 / (eta_k ||h_{k,j}||^2) for every feasible point.
  RMatrix energy_price_bounds() const;

 private:
  struct Sums {
    RMatrix energy;  // Lambda, K x N
    RMatrix user;    // M, K x N
    RVector server;  // V, N + 1 (last zero)
  };
  Sums sums(const RVector& x) const;

  const Instance* inst_;
  Variant variant_;
  double eps_lambda_;
  int K_, N_, M_;
  std::vector<CMatrix> outer_;  // eta_k h h^H, index k * N + i
  RVector local_coef_;          // zeta_k C_k^3 / tau^2
  RMatrix offload_coef_;        // tau sigma^2 / g
  RMatrix offload_threshold_;   // sigma^2 ln2 / (g B): marginal offload energy at R = 0
  double server_coef_;
};

// Operations on plain DualPoint values. All of them throw InvalidArgument on a
// shape mismatch.

DualCheck check_dual_feasible(const Instance& inst, const DualPoint& dual, double eps_lambda = kDefaultEpsLambda);

double solve_L0(const Instance& inst, const DualPoint& dual, int slot);
/// Throws InvalidArgument when the energy suffix sum is below eps_lambda.
double solve_Lk(const Instance& inst, const DualPoint& dual, int user, int slot,
                double eps_lambda = kDefaultEpsLambda);
/// Zero in the last slot: bits offloaded there can never be executed.
double solve_Rk(const Instance& inst, const DualPoint& dual, int user, int slot,
                double eps_lambda = kDefaultEpsLambda);

/// Throws InvalidArgument when the dual point is infeasible.
double dual_value(const Instance& inst, const DualPoint& dual, double eps_lambda = kDefaultEpsLambda);

RVector dual_subgradient(const Instance& inst, const DualPoint& dual, const SubproblemMinimizers& minimizers);

}  // namespace wpmec
