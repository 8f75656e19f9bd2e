#pragma once

// Domain types for the wireless-powered MEC energy minimization problem.
//
// Indices follow one convention everywhere: users are k = 0..K-1, slots are
// i = 0..N-1, and every K x N array is stored as an Eigen matrix with users
// on rows and slots on columns.

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wpmec {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Physical and system parameters. Per-user vectors have one entry per user.
struct SystemParams {
  int antennas = 1;  // M
  int users = 1;     // K
  int slots = 1;     // N
  double slot_duration = 0.1;          // tau [s]
  double bandwidth = 2e6;              // B [Hz], per user
  double noise_power = 1e-9;           // sigma^2 [W]
  double server_capacitance = 1e-29;   // zeta_0
  double server_cycles_per_bit = 1e3;  // C_0
  std::vector<double> harvest_efficiency;  // eta_k in (0, 1]
  std::vector<double> capacitance;         // zeta_k
  std::vector<double> cycles_per_bit;      // C_k
};

struct ChannelRealization {
  /// downlink[k][i]: complex M-vector from the AP to user k in slot i.
  std::vector<std::vector<CVector>> downlink;
  /// Uplink power gain after MRC combining, K x N, linear scale.
  RMatrix uplink_gain;
};

struct TaskArrivals {
  /// Input bits arriving at user k at the start of slot i, K x N.
  RMatrix bits;
};

struct Instance {
  SystemParams params;
  ChannelRealization channels;
  TaskArrivals tasks;

  int users() const { return params.users; }
  int slots() const { return params.slots; }
  int antennas() const { return params.antennas; }
  double total_arrivals() const { return tasks.bits.sum(); }
};

/// Primal decision variables.
struct Allocation {
  std::vector<CMatrix> covariance;  // Q_i, M x M Hermitian per slot
  RVector server_bits;              // L_{0,i}
  RMatrix local_bits;               // L_{k,i}
  RMatrix offload_bits;             // R_{k,i}

  static Allocation zeros(const SystemParams& params);
};

/// Lagrange multipliers of the joint problem.
///   energy(k,i)      >= 0 : energy causality of user k up to slot i
///   user_task(k,i)   >= 0 for i < N-1, free at i = N-1 (task causality / deadline)
///   server_task(i)   >= 0 for i < N-1, free at i = N-1 (AP causality / deadline)
struct DualPoint {
  RMatrix energy;
  RMatrix user_task;
  RVector server_task;

  static DualPoint zeros(const SystemParams& params);
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Reports every shape and value violation; never throws.
ValidationReport validate_instance(const Instance& inst);

/// I_M - sum_k (sum_{j >= slot} lambda_{k,j}) eta_k h_{k,slot} h_{k,slot}^H.
/// Throws std::out_of_range for a slot outside [0, N).
CMatrix hbar(const Instance& inst, const DualPoint& dual, int slot);

/// Suffix sums of a K x N multiplier array along slots.
RMatrix suffix_sums(const RMatrix& values);
/// Suffix sums of an N-vector, returned with N+1 entries (last one zero).
RVector suffix_sums(const RVector& values);

}  // namespace wpmec
