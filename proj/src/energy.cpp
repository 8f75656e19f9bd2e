#include "wpmec/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wpmec/errors.hpp"

namespace wpmec {

double local_energy(double capacitance, double cycles_per_bit, double bits, double tau) {
  if (bits < 0.0) throw InvalidArgument("local_energy: negative bit count");
  const double cycles = cycles_per_bit * bits;
  return capacitance * cycles * cycles * cycles / (tau * tau);
}

double offload_energy(double gain, double bits, double tau, double bandwidth, double noise_power) {
  if (!(gain > 0.0)) throw InvalidArgument("offload_energy: uplink gain must be positive");
  if (bits < 0.0) throw InvalidArgument("offload_energy: negative bit count");
  return tau * noise_power / gain * std::expm1(bits / (tau * bandwidth) * std::numbers::ln2);
}

double harvested_energy(const CMatrix& covariance, const CVector& channel, double efficiency, double tau) {
  if (covariance.rows() != covariance.cols() || covariance.rows() != channel.size()) {
    throw InvalidArgument("harvested_energy: shape mismatch");
  }
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("harvested_energy: covariance is not Hermitian");
  }
  const Complex quad = channel.dot(covariance * channel);  // h^H Q h
  return tau * efficiency * quad.real();
}

double server_energy(double capacitance, double cycles_per_bit, std::span<const double> bits, double tau) {
  double total = 0.0;
  for (double b : bits) total += local_energy(capacitance, cycles_per_bit, b, tau);
  return total;
}

double objective(const Instance& inst, const Allocation& alloc) {
  const auto& p = inst.params;
  double transmit = 0.0;
  for (const auto& q : alloc.covariance) transmit += q.trace().real();
  const auto& l0 = alloc.server_bits;
  double compute = 0.0;
  for (Eigen::Index i = 0; i < l0.size(); ++i) {
    compute += local_energy(p.server_capacitance, p.server_cycles_per_bit, std::max(0.0, l0(i)), p.slot_duration);
  }
  return p.slot_duration * transmit + compute;
}

ConstraintReport residuals(const Instance& inst, const Allocation& alloc) {
  const auto& p = inst.params;
  const int K = p.users;
  const int N = p.slots;
  const double tau = p.slot_duration;
  const RMatrix& A = inst.tasks.bits;
  const RMatrix& L = alloc.local_bits;
  const RMatrix& R = alloc.offload_bits;
  const RVector& L0 = alloc.server_bits;

  ConstraintReport rep;
  rep.user_task_causality.resize(K, N);
  rep.user_deadline.resize(K);
  rep.energy_causality.resize(K, N);
  rep.last_slot_offload.resize(K);
  rep.ap_task_causality.resize(N);
  rep.bits_scale = std::max(1.0, A.sum());

  double energy_scale = 0.0;
  for (int k = 0; k < K; ++k) {
    double backlog = 0.0;
    double consumed = 0.0;
    double harvested = 0.0;
    for (int i = 0; i < N; ++i) {
      backlog += A(k, i) - L(k, i) - R(k, i);
      rep.user_task_causality(k, i) = backlog;
      consumed += local_energy(p.capacitance[k], p.cycles_per_bit[k], std::max(0.0, L(k, i)), tau) +
                  offload_energy(inst.channels.uplink_gain(k, i), std::max(0.0, R(k, i)), tau, p.bandwidth,
                                 p.noise_power);
      harvested += harvested_energy(alloc.covariance[i], inst.channels.downlink[k][i], p.harvest_efficiency[k], tau);
      rep.energy_causality(k, i) = harvested - consumed;
      energy_scale = std::max({energy_scale, consumed, harvested});
    }
    rep.user_deadline(k) = backlog;
    rep.last_slot_offload(k) = R(k, N - 1);
  }
  rep.energy_scale = energy_scale;

  double offloaded_before = 0.0;
  double executed = 0.0;
  for (int i = 0; i < N; ++i) {
    executed += L0(i);
    rep.ap_task_causality(i) = offloaded_before - executed;
    offloaded_before += R.col(i).sum();
  }
  rep.ap_deadline = rep.ap_task_causality(N - 1);

  double min_bits = std::min({L.minCoeff(), R.minCoeff(), L0.minCoeff()});
  rep.min_bits = min_bits;

  double min_eig = 0.0;
  double asym = 0.0;
  double max_trace = 0.0;
  bool first = true;
  for (const auto& q : alloc.covariance) {
    max_trace = std::max(max_trace, q.trace().real());
    asym = std::max(asym, (q - q.adjoint()).cwiseAbs().maxCoeff());
    const CMatrix herm = 0.5 * (q + q.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    const double e = es.eigenvalues().minCoeff();
    min_eig = first ? e : std::min(min_eig, e);
    first = false;
  }
  rep.min_covariance_eig = min_eig;
  rep.max_covariance_asymmetry = asym;
  rep.max_covariance_trace = max_trace;
  return rep;
}

FeasibilityVerdict check_feasibility(const ConstraintReport& r, const FeasibilityTolerance& tol) {
  FeasibilityVerdict v;
  const double bits_tol = tol.causality_rel * r.bits_scale;
  const double eq_tol = tol.equality_rel * r.bits_scale;
  const double energy_tol = tol.causality_rel * std::max(r.energy_scale, 1e-300);

  auto fail = [&](const std::string& what) {
    if (v.feasible) v.first_violation = what;
    v.feasible = false;
  };

  const Eigen::Index K = r.user_task_causality.rows();
  const Eigen::Index N = r.user_task_causality.cols();
  if (N > 1) {
    v.worst_bits_slack = r.user_task_causality.leftCols(N - 1).minCoeff();
    v.worst_bits_slack = std::min(v.worst_bits_slack, r.ap_task_causality.head(N - 1).minCoeff());
  }
  v.worst_energy_slack = r.energy_causality.size() > 0 ? r.energy_causality.minCoeff() : 0.0;
  v.worst_equality = std::max(r.user_deadline.cwiseAbs().maxCoeff(), std::abs(r.ap_deadline));

  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index i = 0; i + 1 < N; ++i) {
      if (r.user_task_causality(k, i) < -bits_tol) {
        std::ostringstream os;
        os << "user task causality violated at user " << k << " slot " << i;
        fail(os.str());
      }
    }
    if (std::abs(r.user_deadline(k)) > eq_tol) fail("user deadline violated at user " + std::to_string(k));
    if (r.last_slot_offload(k) != 0.0) fail("nonzero offload in the last slot at user " + std::to_string(k));
    for (Eigen::Index i = 0; i < N; ++i) {
      if (r.energy_causality(k, i) < -energy_tol) {
        std::ostringstream os;
        os << "energy causality violated at user " << k << " slot " << i;
        fail(os.str());
      }
    }
  }
  for (Eigen::Index i = 0; i + 1 < N; ++i) {
    if (r.ap_task_causality(i) < -bits_tol) fail("AP task causality violated at slot " + std::to_string(i));
  }
  if (std::abs(r.ap_deadline) > eq_tol) fail("AP deadline violated");
  if (r.min_bits < -bits_tol) fail("negative bit allocation");
  if (r.min_covariance_eig < -tol.psd_rel * r.max_covariance_trace) {
    fail("covariance not positive semidefinite");
  }
  return v;
}

}  // namespace wpmec
