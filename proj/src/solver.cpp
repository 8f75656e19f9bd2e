#include "wpmec/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nested.hpp"
#include "wpmec/baselines.hpp"
#include "wpmec/errors.hpp"

namespace wpmec {

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kJoint: return "joint";
    case Scheme::kLocalOnly: return "local-only";
    case Scheme::kFullOffload: return "full-offload";
    case Scheme::kMyopic: return "myopic";
    case Scheme::kSeparate: return "separate";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::kJoint, Scheme::kLocalOnly, Scheme::kFullOffload, Scheme::kMyopic, Scheme::kSeparate}) {
    if (name == to_string(s)) return s;
  }
  throw InvalidArgument("unknown scheme '" + name + "' (expected joint, local-only, full-offload, myopic or separate)");
}

PrimalBits recover_primal(const Instance& inst, const DualPoint& dual, Variant variant) {
  DualProblem dp(inst, variant);
  const SubproblemMinimizers z = dp.minimize(dp.flatten(dual));
  PrimalBits b{z.server_bits, z.local_bits, z.offload_bits};
  b.offload_bits.col(inst.slots() - 1).setZero();
  return b;
}

namespace {

// Bits optimal for energy prices Lambda (suffix sums, K x N) and AP prices V
// (suffix sums, N + 1 entries). Optionally reports the block prices, which
// estimate -M for the users and -V for the AP.
PrimalBits priced_allocation(const Instance& inst, const RMatrix& Lambda, const RVector& V, Variant variant,
                             RMatrix* user_prices = nullptr, RVector* server_prices = nullptr) {
  const auto& p = inst.params;
  const int K = inst.users();
  const int N = inst.slots();
  const double tau = p.slot_duration;
  const RMatrix& A = inst.tasks.bits;
  const bool local = variant != Variant::kFullOffload;
  const bool offload = variant != Variant::kLocalOnly;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  PrimalBits b{RVector::Zero(N), RMatrix::Zero(K, N), RMatrix::Zero(K, N)};
  if (user_prices) *user_prices = RMatrix::Zero(K, N);
  for (int k = 0; k < K; ++k) {
    const double c = p.cycles_per_bit[k];
    const double local_coef = p.capacitance[k] * c * c * c / (tau * tau);
    auto local_part = [&](int j, double w) {
      return local && w > 0.0 ? std::sqrt(w / (3.0 * Lambda(k, j) * local_coef)) : 0.0;
    };
    auto threshold = [&](int j) {
      return Lambda(k, j) * p.noise_power * std::numbers::ln2 / (inst.channels.uplink_gain(k, j) * p.bandwidth);
    };
    auto offload_part = [&](int j, double w) {
      if (!offload || j + 1 >= N) return 0.0;
      const double arg = (w + V(j + 1)) / threshold(j);
      return arg > 1.0 ? tau * p.bandwidth * std::log2(arg) : 0.0;
    };
    detail::NestedSupply sup;
    sup.supply = [&](int j, double w) { return local_part(j, w) + offload_part(j, w); };
    sup.zero_below = [&](int j) {
      double z = local ? 0.0 : kInf;
      if (offload && j + 1 < N) z = std::min(z, threshold(j) - V(j + 1));
      return z;
    };
    RVector caps(N);
    double acc = 0.0;
    for (int i = 0; i < N; ++i) caps(i) = acc += A(k, i);
    RVector x;
    detail::NestedPrices pr;
    if (!detail::solve_nested(caps, sup, x, &pr)) {
      throw InfeasibleError("user " + std::to_string(k) + " cannot meet its deadline under " +
                            (local ? "local computing" : "offloading") + " alone");
    }
    for (int j = 0; j < N; ++j) {
      const double t = pr.theta(j);
      b.local_bits(k, j) = (1.0 - t) * local_part(j, pr.lo(j)) + t * local_part(j, pr.hi(j));
      b.offload_bits(k, j) = (1.0 - t) * offload_part(j, pr.lo(j)) + t * offload_part(j, pr.hi(j));
      if (user_prices) (*user_prices)(k, j) = (1.0 - t) * pr.lo(j) + t * pr.hi(j);
    }
  }
  if (server_prices) *server_prices = RVector::Zero(N);
  if (offload) {
    const double c0 = p.server_cycles_per_bit;
    const double server_coef = p.server_capacitance * c0 * c0 * c0 / (tau * tau);
    detail::NestedSupply sup;
    sup.supply = [&](int, double w) { return w > 0.0 ? std::sqrt(w / (3.0 * server_coef)) : 0.0; };
    sup.zero_below = [](int) { return 0.0; };
    const RVector offloaded = b.offload_bits.colwise().sum().transpose();
    RVector caps(N);
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      caps(i) = acc;
      acc += offloaded(i);
    }
    caps(N - 1) = offloaded.sum();
    RVector x;
    detail::NestedPrices pr;
    if (!detail::solve_nested(caps, sup, x, &pr)) throw NumericalError("server allocation failed");
    b.server_bits = x;
    if (server_prices) {
      for (int j = 0; j < N; ++j) (*server_prices)(j) = (1.0 - pr.theta(j)) * pr.lo(j) + pr.theta(j) * pr.hi(j);
    }
  }
  return b;
}

}  // namespace

PrimalBits price_consistent_bits(const Instance& inst, const DualPoint& dual, Variant variant) {
  return priced_allocation(inst, suffix_sums(dual.energy), suffix_sums(dual.server_task), variant);
}

namespace {

// Lowers every entry above a common level so that `amount` is removed in
// total. Keeps nondecreasing sequences nondecreasing.
template <typename Row>
void cap_remove(Row&& v, double amount) {
  const Eigen::Index n = v.size();
  if (amount <= 0.0 || n == 0) return;
  std::vector<double> sorted;
  sorted.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) sorted.push_back(v(i));
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Find level c with sum max(v - c, 0) = amount.
  double removed_above = 0.0;
  double level = 0.0;
  for (std::size_t m = 0; m < sorted.size(); ++m) {
    const double next = m + 1 < sorted.size() ? sorted[m + 1] : 0.0;
    const double gain = (sorted[m] - next) * static_cast<double>(m + 1);
    if (removed_above + gain >= amount) {
      level = sorted[m] - (amount - removed_above) / static_cast<double>(m + 1);
      break;
    }
    removed_above += gain;
    level = next;
  }
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::min(v(i), level);
}

}  // namespace

PrimalBits repair_feasibility(const Instance& inst, const PrimalBits& in, Variant variant, RepairInfo* info) {
  const int K = inst.users();
  const int N = inst.slots();
  const RMatrix& A = inst.tasks.bits;
  PrimalBits b = in;
  b.local_bits = b.local_bits.cwiseMax(0.0);
  b.offload_bits = b.offload_bits.cwiseMax(0.0);
  b.server_bits = b.server_bits.cwiseMax(0.0);
  b.offload_bits.col(N - 1).setZero();
  if (variant == Variant::kLocalOnly) {
    b.offload_bits.setZero();
    b.server_bits.setZero();
  }
  if (variant == Variant::kFullOffload) b.local_bits.setZero();
  const bool full = variant == Variant::kFullOffload;

  for (int k = 0; k < K; ++k) {
    auto L = b.local_bits.row(k);
    auto R = b.offload_bits.row(k);
    if (full) {
      if (A(k, N - 1) > 0.0 || (N == 1 && A.row(k).sum() > 0.0)) {
        throw InfeasibleError("full offloading cannot serve bits of user " + std::to_string(k) +
                              " that arrive in the last slot");
      }
    }
    // Forward pass: push any prefix excess into the next slot.
    double arrived = 0.0;
    double done = 0.0;
    for (int i = 0; i + 1 < N; ++i) {
      arrived += A(k, i);
      double excess = done + L(i) + R(i) - arrived;
      if (excess > 0.0) {
        const double dr = std::min(excess, R(i));
        R(i) -= dr;
        if (i + 1 < N - 1) {
          R(i + 1) += dr;
        } else if (!full) {
          L(N - 1) += dr;
        }
        excess -= dr;
        if (excess > 0.0) {
          // Lowering only L(i) could leave it below L(i-1).
          auto head = L.head(i + 1);
          const double before = head.sum();
          cap_remove(head, std::min(excess, before));
          L(i + 1) += before - head.sum();
        }
      }
      done = 0.0;
      for (int j = 0; j <= i; ++j) done += L(j) + R(j);
    }
    // Deadline.
    const double delta = A.row(k).sum() - (L.sum() + R.sum());
    if (delta > 0.0) {
      if (!full) {
        L(N - 1) += delta;
      } else {
        R(N - 2) += delta;
      }
    } else if (delta < 0.0) {
      double surplus = -delta;
      const double ltot = L.sum();
      if (ltot > 0.0) {
        const double take = std::min(surplus, ltot);
        cap_remove(L, take);
        surplus -= take;
      }
      for (int i = N - 2; i >= 0 && surplus > 0.0; --i) {
        const double take = std::min(surplus, R(i));
        R(i) -= take;
        surplus -= take;
      }
    }
  }

  if (variant != Variant::kLocalOnly) {
    RVector& L0 = b.server_bits;
    double offloaded_before = 0.0;
    double executed = 0.0;
    for (int i = 0; i + 1 < N; ++i) {
      const double excess = executed + L0(i) - offloaded_before;
      if (excess > 0.0) {
        auto head = L0.head(i + 1);
        const double before = head.sum();
        cap_remove(head, std::min(excess, before));
        L0(i + 1) += before - head.sum();
      }
      executed = L0.head(i + 1).sum();
      offloaded_before += b.offload_bits.col(i).sum();
    }
    const double total = b.offload_bits.sum();
    const double delta = total - L0.sum();
    if (delta > 0.0) {
      L0(N - 1) += delta;
    } else if (delta < 0.0) {
      cap_remove(L0, -delta);
    }
  }

  if (info) {
    const double moved = (b.local_bits - in.local_bits).cwiseAbs().sum() +
                         (b.offload_bits - in.offload_bits).cwiseAbs().sum() +
                         (b.server_bits - in.server_bits).cwiseAbs().sum();
    info->magnitude = moved;
    info->applied = moved > 0.0;
    info->excessive = moved > 0.01 * inst.total_arrivals();
  }
  return b;
}

SolveReport evaluate_bits(const Instance& inst, const PrimalBits& bits, Scheme scheme, const SolveOptions& opts) {
  SolveReport rep;
  rep.scheme = scheme;
  const RMatrix D = energy_demands(inst, bits.local_bits, bits.offload_bits);
  SdpResult sdp = solve_wpt_sdp(inst, D, opts.sdp);
  rep.sdp_status = sdp.status;
  if (sdp.status == SdpStatus::kNumerical) rep.notes.push_back("beamforming SDP: " + sdp.message);
  rep.allocation.covariance = std::move(sdp.covariance);
  rep.allocation.server_bits = bits.server_bits;
  rep.allocation.local_bits = bits.local_bits;
  rep.allocation.offload_bits = bits.offload_bits;
  rep.primal_objective = objective(inst, rep.allocation);
  rep.residuals = residuals(inst, rep.allocation);
  rep.feasibility = check_feasibility(rep.residuals);
  rep.dual_value = std::numeric_limits<double>::quiet_NaN();
  rep.duality_gap_rel = std::numeric_limits<double>::quiet_NaN();
  return rep;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Scheme scheme_of(Variant v) {
  switch (v) {
    case Variant::kJoint: return Scheme::kJoint;
    case Variant::kLocalOnly: return Scheme::kLocalOnly;
    case Variant::kFullOffload: return Scheme::kFullOffload;
  }
  return Scheme::kJoint;
}

SolveReport zero_load_report(const Instance& inst, Variant variant) {
  SolveReport rep;
  rep.scheme = scheme_of(variant);
  rep.status = "zero_load";
  rep.allocation = Allocation::zeros(inst.params);
  rep.residuals = residuals(inst, rep.allocation);
  rep.feasibility = check_feasibility(rep.residuals);
  rep.sdp_status = SdpStatus::kZeroDemand;
  rep.has_dual = true;
  rep.dual = DualPoint::zeros(inst.params);
  rep.dual.energy.col(inst.slots() - 1).setConstant(inst.slots() * kDefaultEpsLambda);
  return rep;
}

// Box [lo, hi] per flattened coordinate that should contain the optimal
// multipliers; the initial ellipsoid circumscribes it.
struct DualBox {
  RVector lo, hi;
};

DualBox dual_box(const DualProblem& dp) {
  const Instance& inst = dp.instance();
  const auto& p = inst.params;
  const int K = p.users;
  const int N = p.slots;
  const int KN = K * N;
  const Variant variant = dp.variant();

  RMatrix u = dp.energy_price_bounds();
  double finite_max = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::isfinite(u.data()[i])) finite_max = std::max(finite_max, u.data()[i]);
  }
  if (finite_max == 0.0) finite_max = 1.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u.data()[i])) u.data()[i] = 10.0 * finite_max;
  }

  // Price scales: the allocation at the largest energy prices the PSD
  // condition admits bounds the user task prices from above in practice; the
  // AP price is also compared with the marginal cost of executing every bit
  // at an even pace. The box only has to contain an optimum, and a loose box
  // costs a logarithmic number of extra iterations.
  RMatrix user_prices;
  RVector server_prices;
  priced_allocation(inst, u, RVector::Zero(N + 1), variant, &user_prices, &server_prices);
  double server_scale = server_prices.cwiseAbs().maxCoeff();
  if (dp.has_server_block()) {
    const double tau = p.slot_duration;
    const double c0 = p.server_cycles_per_bit;
    const double a0 = p.server_capacitance * c0 * c0 * c0 / (tau * tau);
    const double l0 = inst.tasks.bits.sum() / std::max(1, N - 1);
    server_scale = std::max(server_scale, 3.0 * a0 * l0 * l0);
  }
  double scale_floor = std::max(server_scale, user_prices.cwiseAbs().maxCoeff()) * 1e-9;
  if (!(scale_floor > 0.0)) scale_floor = 1e-300;
  RVector cu(K);
  for (int k = 0; k < K; ++k) cu(k) = 10.0 * std::max({user_prices.row(k).cwiseAbs().maxCoeff(), server_scale, scale_floor});
  const double cs = 10.0 * std::max(server_scale, scale_floor);

  DualBox box;
  box.lo = RVector::Zero(dp.dimension());
  box.hi = RVector::Zero(dp.dimension());
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < N; ++i) {
      box.hi(k * N + i) = u(k, i);
      box.hi(KN + k * N + i) = i + 1 < N ? cu(k) : 0.1 * cu(k);
      box.lo(KN + k * N + i) = i + 1 < N ? 0.0 : -cu(k);
    }
  }
  if (dp.has_server_block()) {
    for (int i = 0; i < N; ++i) {
      box.hi(2 * KN + i) = i + 1 < N ? cs : 0.1 * cs;
      box.lo(2 * KN + i) = i + 1 < N ? 0.0 : -cs;
    }
  }
  return box;
}

struct Candidate {
  bool valid = false;
  SolveReport report;
  PrimalBits bits;
  RepairInfo repair;
};

}  // namespace

SolveReport solve_dual_scheme(const Instance& inst, Variant variant, const SolveOptions& opts) {
  const auto t0 = Clock::now();
  const ValidationReport vr = validate_instance(inst);
  if (!vr.ok()) throw InvalidArgument("invalid instance: " + vr.violations.front());
  const int N = inst.slots();
  const RMatrix& A = inst.tasks.bits;
  if (variant == Variant::kFullOffload) {
    for (int k = 0; k < inst.users(); ++k) {
      if (A(k, N - 1) > 0.0 || (N == 1 && A.row(k).sum() > 0.0)) {
        throw InfeasibleError("full offloading is infeasible: user " + std::to_string(k) +
                              " has task bits arriving in the last slot");
      }
    }
  }
  if (A.sum() == 0.0) {
    SolveReport rep = zero_load_report(inst, variant);
    rep.wall_time_s = seconds_since(t0);
    return rep;
  }

  DualProblem dp(inst, variant, opts.eps_lambda);
  const int n = dp.dimension();
  auto log = [&](int level, const std::string& msg) {
    if (opts.log) opts.log(level, msg);
  };

  // Trust box for the multipliers. Structurally flat directions of the dual
  // (a multiplier that only enters through a sum with another one) would
  // otherwise stretch the ellipsoid without bound. The energy prices are
  // bounded by the PSD condition already, so only mu and nu are boxed; the
  // box grows on every restart.
  DualBox box = dual_box(dp);
  const int KN = inst.users() * N;
  RVector trust_lo = box.lo, trust_hi = box.hi;
  auto set_trust = [&](double factor) {
    for (int i = KN; i < n; ++i) {
      const double mid = 0.5 * (box.lo(i) + box.hi(i));
      const double half = 0.5 * (box.hi(i) - box.lo(i)) * factor;
      trust_lo(i) = box.lo(i) == 0.0 ? 0.0 : mid - half;
      trust_hi(i) = mid + half;
    }
  };
  set_trust(1.0);

  // Running average of the subproblem minimizers over nearly optimal
  // objective cuts. Near a kink of the dual the minimizer at a single point is
  // a poor primal estimate while the average approaches the primal optimum.
  double seen_best = -std::numeric_limits<double>::infinity();
  PrimalBits avg_sum;
  long avg_count = 0;
  auto reset_average = [&]() {
    avg_sum.server_bits = RVector::Zero(N);
    avg_sum.local_bits = RMatrix::Zero(inst.users(), N);
    avg_sum.offload_bits = RMatrix::Zero(inst.users(), N);
    avg_count = 0;
  };
  reset_average();
  auto accumulate = [&](const DualEvaluation& ev) {
    seen_best = std::max(seen_best, ev.value);
    if (ev.value < seen_best - opts.gap_tol * std::abs(seen_best)) return;
    avg_sum.server_bits += ev.minimizers.server_bits;
    avg_sum.local_bits += ev.minimizers.local_bits;
    avg_sum.offload_bits += ev.minimizers.offload_bits;
    ++avg_count;
  };

  EllipsoidOracle oracle = [&](const RVector& x) {
    EllipsoidCut cut;
    for (int i = KN; i < n; ++i) {
      if (x(i) > trust_hi(i) || x(i) < trust_lo(i)) {
        cut.kind = EllipsoidCut::Kind::kFeasibility;
        cut.direction = RVector::Zero(n);
        const bool above = x(i) > trust_hi(i);
        cut.direction(i) = above ? -1.0 : 1.0;
        cut.depth = above ? x(i) - trust_hi(i) : trust_lo(i) - x(i);
        return cut;
      }
    }
    DualCheck c = dp.check(x);
    if (!c.feasible) {
      cut.kind = EllipsoidCut::Kind::kFeasibility;
      cut.direction = std::move(c.direction);
      cut.depth = c.depth;
      return cut;
    }
    DualEvaluation ev = dp.evaluate(x);
    accumulate(ev);
    cut.kind = EllipsoidCut::Kind::kObjective;
    cut.value = ev.value;
    cut.direction = std::move(ev.subgradient);
    return cut;
  };

  const Scheme scheme = scheme_of(variant);
  Candidate best;
  double best_dual = -std::numeric_limits<double>::infinity();
  RVector best_dual_point;
  long total_iter = 0;
  std::vector<EllipsoidTraceRow> trace;

  auto certified = [&]() {
    if (!best.valid) return false;
    const double p = best.report.primal_objective;
    return p - best_dual <= opts.gap_tol * std::max(std::abs(p), 1e-300);
  };
  auto try_bits = [&](const PrimalBits& raw) {
    RepairInfo info;
    PrimalBits fixed = repair_feasibility(inst, raw, variant, &info);
    SolveReport r = evaluate_bits(inst, fixed, scheme, opts);
    if (!best.valid || r.primal_objective < best.report.primal_objective) {
      best.valid = true;
      best.report = std::move(r);
      best.bits = std::move(fixed);
      best.repair = info;
    }
  };
  auto try_candidate = [&](const RVector& x) {
    const auto tc = Clock::now();
    const DualPoint d = dp.unflatten(x);
    // Bits priced by the dual point are nearly always the best candidate;
    // the closed-form and averaged minimizers are fallbacks.
    try {
      try_bits(price_consistent_bits(inst, d, variant));
    } catch (const InfeasibleError&) {
    }
    if (!certified()) try_bits(recover_primal(inst, d, variant));
    if (!certified() && avg_count > 1) {
      const double w = 1.0 / static_cast<double>(avg_count);
      PrimalBits avg{avg_sum.server_bits * w, avg_sum.local_bits * w, avg_sum.offload_bits * w};
      avg.offload_bits.col(N - 1).setZero();
      try_bits(avg);
    }
    std::ostringstream os;
    os << to_string(scheme) << ": candidate primal " << best.report.primal_objective << " in " << seconds_since(tc)
       << " s";
    log(0, os.str());
  };

  RVector center = 0.5 * (box.lo + box.hi);
  RVector half = 0.5 * (box.hi - box.lo);
  const double floor_width = 1e-6 * half.maxCoeff();
  for (int i = 0; i < n; ++i) half(i) = std::max(half(i), floor_width);
  double enlarge = std::sqrt(static_cast<double>(n)) * 1.05;

  std::string stop_reason;
  for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
    EllipsoidOptions eo;
    eo.abs_tol = opts.tol;
    eo.max_iter = std::max<long>(1, opts.max_iter - total_iter);
    eo.deep_cuts = opts.deep_cuts;
    eo.trace_stride = opts.trace_stride;
    eo.stagnation_rel = 1e-12;
    eo.stagnation_factor = 50;
    // A candidate primal costs an SDP solve, so candidates are built only once
    // the ellipsoid's own bound is within a few tolerances, and then on a
    // geometric schedule.
    long next_check = 0;
    double last_checked = -std::numeric_limits<double>::infinity();
    eo.monitor_stride = std::max(20, n);
    eo.monitor = [&](const EllipsoidProgress& pr) {
      if (!pr.has_best) return true;
      if (pr.best_value > best_dual) {
        best_dual = pr.best_value;
        best_dual_point = *pr.best_point;
      }
      const double scale = std::max(std::abs(pr.best_value), 1e-300);
      const bool bound_close = pr.upper_bound - pr.best_value <= 10.0 * opts.gap_tol * scale;
      if (bound_close && pr.iteration >= next_check && pr.best_value > last_checked) {
        last_checked = pr.best_value;
        next_check = static_cast<long>(pr.iteration * 1.2) + 1;
        try_candidate(*pr.best_point);
        std::ostringstream os;
        os << to_string(scheme) << ": iteration " << pr.iteration << " dual " << pr.best_value << " bound "
           << pr.upper_bound;
        log(0, os.str());
        if (certified()) return false;
      }
      return true;
    };
    EllipsoidResult er = maximize(oracle, center, RVector(half * enlarge), eo);
    total_iter += er.iterations;
    trace.insert(trace.end(), er.trace.begin(), er.trace.end());
    if (er.found_feasible && er.best_value > best_dual) {
      best_dual = er.best_value;
      best_dual_point = er.best_point;
    }
    if (er.found_feasible && !certified()) try_candidate(er.best_point);
    stop_reason = to_string(er.stop);
    std::ostringstream os;
    os << to_string(scheme) << ": attempt " << attempt << " stopped (" << stop_reason << ") after "
       << er.iterations << " iterations, dual " << best_dual << ", primal "
       << (best.valid ? best.report.primal_objective : std::nan(""));
    log(0, os.str());
    if (certified() || total_iter >= opts.max_iter) break;
    // Not certified: the optimum may lie outside the initial ellipsoid.
    if (best_dual_point.size() == n) center = best_dual_point;
    enlarge *= 10.0;
    set_trust(std::pow(10.0, attempt + 1));
  }

  if (!best.valid) {
    throw NumericalError("dual iteration found no feasible multipliers within " + std::to_string(total_iter) +
                         " iterations");
  }
  SolveReport rep = std::move(best.report);
  rep.scheme = scheme;
  rep.repair = best.repair;
  rep.iterations = total_iter;
  rep.trace = std::move(trace);
  rep.has_dual = true;
  rep.dual = dp.unflatten(best_dual_point);
  rep.dual_value = best_dual;
  rep.duality_gap_rel = (rep.primal_objective - best_dual) / std::max(rep.primal_objective, 1e-12);
  rep.status = certified() ? "optimal" : "suboptimal";
  if (!certified()) {
    std::ostringstream os;
    os << "duality gap " << rep.duality_gap_rel << " above tolerance " << opts.gap_tol << " (" << stop_reason << ")";
    rep.notes.push_back(os.str());
  }
  if (rep.repair.excessive) rep.notes.push_back("feasibility repair moved more than 1% of the arrivals");
  rep.wall_time_s = seconds_since(t0);
  return rep;
}

SolveReport solve(const Instance& inst, const SolveOptions& opts) {
  return solve_dual_scheme(inst, Variant::kJoint, opts);
}

SolveReport solve_scheme(const Instance& inst, Scheme scheme, const SolveOptions& opts) {
  switch (scheme) {
    case Scheme::kJoint: return solve_dual_scheme(inst, Variant::kJoint, opts);
    case Scheme::kLocalOnly: return solve_dual_scheme(inst, Variant::kLocalOnly, opts);
    case Scheme::kFullOffload: return solve_dual_scheme(inst, Variant::kFullOffload, opts);
    case Scheme::kMyopic: return solve_myopic(inst, opts);
    case Scheme::kSeparate: return solve_separate(inst, opts);
  }
  throw InvalidArgument("unknown scheme");
}

}  // namespace wpmec
