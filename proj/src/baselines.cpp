#include "wpmec/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "wpmec/ellipsoid.hpp"
#include "wpmec/energy.hpp"
#include "wpmec/errors.hpp"
#include "wpmec/hermitian.hpp"
#include "wpmec/sdp.hpp"

namespace wpmec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void require_valid(const Instance& inst) {
  const ValidationReport vr = validate_instance(inst);
  if (!vr.ok()) throw InvalidArgument("invalid instance: " + vr.violations.front());
}

// Root of an increasing function on [lo, hi] by Newton steps that fall back
// to bisection whenever they leave the bracket.
template <typename F>
double increasing_root(F&& f, double lo, double hi, double x) {
  for (int it = 0; it < 200; ++it) {
    const auto [v, d] = f(x);
    if (v == 0.0) return x;
    (v < 0.0 ? lo : hi) = x;
    const double next = d > 0.0 ? x - v / d : lo - 1.0;
    if (next >= lo && next <= hi) {
      if (std::abs(next - x) <= 1e-15 * std::abs(x)) return next;
      x = next;
    } else {
      x = 0.5 * (lo + hi);
    }
    if (hi - lo <= 1e-15 * std::abs(hi)) break;
  }
  return x;
}

// One slot of the myopic design. For energy prices y (transmit joules per
// harvested joule) every user splits its arrivals to minimize
// y_k (a_k L^3 + c_k (2^{R/rate} - 1)) + p R, and the AP price p of the
// offloaded bits equals the marginal computing cost 3 c0 S^2 of their sum S.
struct SlotProblem {
  RVector bits, a, c, eta;
  std::vector<CVector> h;
  double rate = 0.0, c0 = 0.0;

  int users() const { return static_cast<int>(bits.size()); }

  double offload_at(int k, double y, double p, double hint) const {
    const double A = bits(k);
    if (A <= 0.0) return 0.0;
    const double g = std::numbers::ln2 / rate;
    auto phi = [&](double R) {
      const double e = std::exp2(R / rate);
      const double rest = A - R;
      return std::pair{y * (c(k) * g * e - 3.0 * a(k) * rest * rest) + p, y * (c(k) * g * g * e + 6.0 * a(k) * rest)};
    };
    if (phi(0.0).first >= 0.0) return 0.0;
    if (phi(A).first <= 0.0) return A;
    return increasing_root(phi, 0.0, A, std::clamp(hint, 0.0, A));
  }

  // Offloaded bits per user at prices y; `hint` carries the previous answer.
  RVector split(const RVector& y, RVector& hint) const {
    const int K = users();
    RVector R = hint;
    auto balance = [&](double p) {
      double S = 0.0, dS = 0.0;
      for (int k = 0; k < K; ++k) {
        R(k) = offload_at(k, y(k), p, R(k));
        S += R(k);
        if (R(k) > 0.0 && R(k) < bits(k)) {
          const double e = std::exp2(R(k) / rate);
          const double g = std::numbers::ln2 / rate;
          const double curv = y(k) * (c(k) * g * g * e + 6.0 * a(k) * (bits(k) - R(k)));
          if (curv > 0.0) dS -= 1.0 / curv;
        }
      }
      return std::pair{p - 3.0 * c0 * S * S, 1.0 - 6.0 * c0 * S * dS};
    };
    const double total = bits.sum();
    const double pmax = 3.0 * c0 * total * total;
    const double p = pmax > 0.0 ? increasing_root(balance, 0.0, pmax, 0.0) : 0.0;
    balance(p);
    hint = R;
    return R;
  }

  double user_energy(int k, double R) const {
    const double L = bits(k) - R;
    return a(k) * L * L * L + (R > 0.0 ? c(k) * std::expm1(R / rate * std::numbers::ln2) : 0.0);
  }
};

// Offloaded bits of the cheapest per-slot system energy: an ellipsoid
// search over the energy prices, which are bounded by 1 / (eta_k ||h_k||^2).
RVector myopic_offload(const SlotProblem& sp, int M) {
  const int K = sp.users();
  RVector upper(K);
  for (int k = 0; k < K; ++k) {
    const double gain = sp.eta(k) * sp.h[k].squaredNorm();
    if (!(gain > 0.0)) throw InfeasibleError("myopic: a user with arrivals has no downlink channel");
    upper(k) = 1.0 / gain;
  }
  RVector hint = RVector::Zero(K);
  EllipsoidOracle oracle = [&](const RVector& y) {
    EllipsoidCut cut;
    Eigen::Index worst = 0;
    if (y.minCoeff(&worst) < 0.0) {
      cut.kind = EllipsoidCut::Kind::kFeasibility;
      cut.direction = RVector::Unit(K, worst);
      cut.depth = -y(worst);
      return cut;
    }
    CMatrix H = CMatrix::Identity(M, M);
    for (int k = 0; k < K; ++k) H -= y(k) * sp.eta(k) * sp.h[k] * sp.h[k].adjoint();
    H = 0.5 * (H + H.adjoint());
    const auto [lam, v] = min_eig_hermitian(H);
    if (lam < 0.0) {
      cut.kind = EllipsoidCut::Kind::kFeasibility;
      cut.direction.resize(K);
      for (int k = 0; k < K; ++k) cut.direction(k) = -sp.eta(k) * std::norm(sp.h[k].dot(v));
      cut.depth = -lam;
      return cut;
    }
    const RVector R = sp.split(y, hint);
    cut.direction.resize(K);
    for (int k = 0; k < K; ++k) cut.direction(k) = sp.user_energy(k, R(k));
    const double S = R.sum();
    cut.value = y.dot(cut.direction) + sp.c0 * S * S * S;
    return cut;
  };
  EllipsoidOptions eo;
  eo.deep_cuts = true;
  eo.abs_tol = 0.0;
  eo.rel_tol = 1e-11;
  eo.max_iter = 200000;
  const EllipsoidResult res = maximize(oracle, 0.5 * upper, 0.5 * std::sqrt(static_cast<double>(K)) * upper * 1.01, eo);
  RVector y = res.found_feasible ? res.best_point : upper;
  return sp.split(y, hint);
}

Instance single_slot(const Instance& inst, int slot) {
  Instance s;
  s.params = inst.params;
  s.params.slots = 1;
  const int K = inst.users();
  s.channels.downlink.assign(K, {});
  s.channels.uplink_gain = inst.channels.uplink_gain.col(slot);
  s.tasks.bits = inst.tasks.bits.col(slot);
  for (int k = 0; k < K; ++k) s.channels.downlink[k].push_back(inst.channels.downlink[k][slot]);
  return s;
}

}  // namespace

SolveReport solve_local_only(const Instance& inst, const SolveOptions& opts) {
  return solve_dual_scheme(inst, Variant::kLocalOnly, opts);
}

SolveReport solve_full_offloading(const Instance& inst, const SolveOptions& opts) {
  return solve_dual_scheme(inst, Variant::kFullOffload, opts);
}

SolveReport solve_myopic(const Instance& inst, const SolveOptions& opts) {
  const auto t0 = Clock::now();
  require_valid(inst);
  const auto& p = inst.params;
  const int K = inst.users();
  const int N = inst.slots();
  const int M = inst.antennas();
  const double tau = p.slot_duration;
  const double rate = tau * p.bandwidth;

  SolveReport rep;
  rep.scheme = Scheme::kMyopic;
  Allocation& al = rep.allocation;
  al = Allocation::zeros(p);
  bool zero_demand_everywhere = true;
  for (int i = 0; i < N; ++i) {
    // Without energy carried across slots and with every slot finishing its
    // own arrivals, the slots decouple: slot i pays its transmit energy and
    // the AP computing of its offloaded bits in slot i + 1.
    SlotProblem sp;
    sp.bits = inst.tasks.bits.col(i);
    sp.a.resize(K);
    sp.c.resize(K);
    sp.eta.resize(K);
    sp.rate = rate;
    sp.c0 = p.server_capacitance * std::pow(p.server_cycles_per_bit, 3) / (tau * tau);
    for (int k = 0; k < K; ++k) {
      const double c = p.cycles_per_bit[k];
      sp.a(k) = p.capacitance[k] * c * c * c / (tau * tau);
      sp.c(k) = tau * p.noise_power / inst.channels.uplink_gain(k, i);
      sp.eta(k) = p.harvest_efficiency[k];
      sp.h.push_back(inst.channels.downlink[k][i]);
    }
    RVector offload = RVector::Zero(K);
    if (i + 1 < N && sp.bits.sum() > 0.0) offload = myopic_offload(sp, M);
    RMatrix demand(K, 1);
    for (int k = 0; k < K; ++k) {
      al.offload_bits(k, i) = offload(k);
      al.local_bits(k, i) = sp.bits(k) - offload(k);
      demand(k, 0) = local_energy(p.capacitance[k], p.cycles_per_bit[k], al.local_bits(k, i), tau) +
                     offload_energy(inst.channels.uplink_gain(k, i), offload(k), tau, p.bandwidth, p.noise_power);
    }
    if (i > 0) al.server_bits(i) = al.offload_bits.col(i - 1).sum();
    const SdpResult sdp = solve_wpt_sdp(single_slot(inst, i), demand, opts.sdp);
    if (sdp.status == SdpStatus::kNumerical) rep.notes.push_back("slot " + std::to_string(i) + " SDP: " + sdp.message);
    if (sdp.status != SdpStatus::kZeroDemand) zero_demand_everywhere = false;
    if (rep.sdp_status == SdpStatus::kOptimal || sdp.status == SdpStatus::kNumerical) rep.sdp_status = sdp.status;
    al.covariance[i] = sdp.covariance.empty() ? CMatrix::Zero(M, M) : sdp.covariance.front();
  }
  if (zero_demand_everywhere) rep.sdp_status = SdpStatus::kZeroDemand;
  rep.primal_objective = objective(inst, al);
  rep.residuals = residuals(inst, al);
  rep.feasibility = check_feasibility(rep.residuals);
  rep.dual_value = std::numeric_limits<double>::quiet_NaN();
  rep.duality_gap_rel = std::numeric_limits<double>::quiet_NaN();
  rep.status = inst.total_arrivals() == 0.0 ? "zero_load" : "optimal";
  rep.wall_time_s = seconds_since(t0);
  return rep;
}

SolveReport solve_separate(const Instance& inst, const SolveOptions& opts) {
  const auto t0 = Clock::now();
  require_valid(inst);
  // Unit energy weight on every slot and no AP price: a unit multiplier on
  // the last energy constraint makes every suffix sum equal to one.
  DualPoint prices = DualPoint::zeros(inst.params);
  prices.energy.col(inst.slots() - 1).setOnes();
  const PrimalBits raw = price_consistent_bits(inst, prices, Variant::kJoint);
  RepairInfo info;
  const PrimalBits bits = repair_feasibility(inst, raw, Variant::kJoint, &info);
  SolveReport rep = evaluate_bits(inst, bits, Scheme::kSeparate, opts);
  rep.repair = info;
  rep.status = inst.total_arrivals() == 0.0 ? "zero_load" : "optimal";
  rep.wall_time_s = seconds_since(t0);
  return rep;
}

}  // namespace wpmec
