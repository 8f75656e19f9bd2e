#include "wpmec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wpmec/energy.hpp"
#include "wpmec/errors.hpp"
#include "wpmec/hermitian.hpp"
#include "wpmec/sdp.hpp"

namespace wpmec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Vertex enumeration of min sum q s.t. G q >= d, q >= 0; fine for N <= 3.
double small_covering_lp(const RMatrix& G, const RVector& d, RVector& q_best) {
  const int n = static_cast<int>(G.cols());
  const int m = static_cast<int>(G.rows());
  RMatrix rows(m + n, n);
  RVector rhs(m + n);
  rows.topRows(m) = G;
  rows.bottomRows(n) = RMatrix::Identity(n, n);
  rhs.head(m) = d;
  rhs.tail(n).setZero();
  const double slack_tol = 1e-12 * std::max(1.0, d.cwiseAbs().maxCoeff());
  double best = kInf;
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i;
  const int total = m + n;
  while (true) {
    RMatrix A(n, n);
    RVector b(n);
    for (int r = 0; r < n; ++r) {
      A.row(r) = rows.row(pick[r]);
      b(r) = rhs(pick[r]);
    }
    Eigen::FullPivLU<RMatrix> lu(A);
    if (lu.isInvertible()) {
      const RVector q = lu.solve(b);
      if ((rows * q - rhs).minCoeff() >= -slack_tol && q.sum() < best) {
        best = q.sum();
        q_best = q.cwiseMax(0.0);
      }
    }
    int r = n - 1;
    while (r >= 0 && pick[r] == total - n + r) --r;
    if (r < 0) break;
    ++pick[r];
    for (int s = r + 1; s < n; ++s) pick[s] = pick[s - 1] + 1;
  }
  return best;
}

// Flattest nondecreasing profile with prefix sums under caps and the total
// equal to the last cap: each block takes the smallest average, ties going to
// the longer block.
void taut_schedule(const double* cap, int n, double* x) {
  int s = 0;
  double base = 0.0;
  while (s < n) {
    int best_e = s;
    double best_avg = kInf;
    for (int e = s; e < n; ++e) {
      const double avg = (cap[e] - base) / (e - s + 1);
      if (avg <= best_avg) {
        best_avg = avg;
        best_e = e;
      }
    }
    for (int j = s; j <= best_e; ++j) x[j] = std::max(0.0, best_avg);
    base = cap[best_e];
    s = best_e + 1;
  }
}

constexpr int kMaxSlots = 3;
constexpr int kMaxUsers = 2;

struct Grid {
  const Instance* inst;
  int K, N, dims;
  double tau;
  RVector local_coef;           // zeta C^3 / tau^2
  RMatrix price;                // K = 1: cheapest cost of one joule delivered by slot i
  double server_coef;
  // State of the current point.
  RVector u;
  double L[kMaxUsers][kMaxSlots] = {};
  double R[kMaxUsers][kMaxSlots] = {};
  double e[kMaxUsers][kMaxSlots] = {};
  double avail[kMaxUsers][kMaxSlots] = {};
  double server = 0.0;  // AP cost, fixed once every offload variable is set
  double best = kInf;
  RVector best_u;
  RVector lo, hi;
  int res;
  long points = 0;

  void update_server() {
    double cap[kMaxSlots];
    double x[kMaxSlots];
    double run = 0.0;
    for (int i = 0; i < N; ++i) {
      cap[i] = run;
      if (i + 1 < N)
        for (int k = 0; k < K; ++k) run += R[k][i];
    }
    cap[N - 1] = run;
    taut_schedule(cap, N, x);
    server = 0.0;
    for (int i = 0; i < N; ++i) server += server_coef * x[i] * x[i] * x[i];
  }

  double transmit_cost() const {
    if (K == 1) {
      double c = 0.0;
      for (int i = 0; i < N; ++i) {
        if (e[0][i] > 0.0) {
          if (!std::isfinite(price(0, i))) return kInf;
          c += e[0][i] * price(0, i);
        }
      }
      return c;
    }
    RMatrix D(K, N);
    for (int k = 0; k < K; ++k) {
      double run = 0.0;
      for (int i = 0; i < N; ++i) D(k, i) = run += e[k][i];
    }
    return scalar_transmit_energy(*inst, D);
  }

  void finish_user(int k) {
    const int i = N - 1;
    L[k][i] = avail[k][i];
    R[k][i] = 0.0;
    e[k][i] = local_coef(k) * L[k][i] * L[k][i] * L[k][i];
  }

  // Dimension d belongs to user d / (2(N-1)); inside a user the order is
  // R_0, L_0, R_1, L_1, ...
  void visit(int d) {
    if (d == dims) {
      ++points;
      const double v = transmit_cost() + server;
      if (v < best) {
        best = v;
        best_u = u;
      }
      return;
    }
    const int per_user = 2 * (N - 1);
    const int k = d / per_user;
    const int slot = (d % per_user) / 2;
    const bool is_offload = d % 2 == 0;
    const auto& p = inst->params;
    double off = is_offload ? 0.0 : offload_energy(inst->channels.uplink_gain(k, slot), R[k][slot], tau,
                                                   p.bandwidth, p.noise_power);
    for (int t = 0; t <= res; ++t) {
      const double f = lo(d) + (hi(d) - lo(d)) * t / res;
      u(d) = f;
      if (is_offload) {
        R[k][slot] = f * avail[k][slot];
        off = offload_energy(inst->channels.uplink_gain(k, slot), R[k][slot], tau, p.bandwidth, p.noise_power);
        if (k == K - 1 && slot == N - 2) update_server();
      } else {
        L[k][slot] = f * (avail[k][slot] - R[k][slot]);
        e[k][slot] = local_coef(k) * L[k][slot] * L[k][slot] * L[k][slot] + off;
        avail[k][slot + 1] = avail[k][slot] - L[k][slot] - R[k][slot] + inst->tasks.bits(k, slot + 1);
        if (slot + 1 == N - 1) finish_user(k);
      }
      visit(d + 1);
    }
  }
};

}  // namespace

double scalar_transmit_energy(const Instance& inst, const RMatrix& demands, RVector* q) {
  const auto& p = inst.params;
  const int K = inst.users();
  const int N = inst.slots();
  if (inst.antennas() != 1) throw InvalidArgument("scalar_transmit_energy needs M = 1");
  if (demands.rows() != K || demands.cols() != N) throw InvalidArgument("demand array has the wrong shape");
  const double tau = p.slot_duration;
  RVector qq = RVector::Zero(N);
  double cost;
  if (K == 1) {
    // Each increment of the cumulative demand is bought in the cheapest slot
    // available by its deadline.
    int best_slot = -1;
    double best_gain = 0.0;
    double covered = 0.0;
    cost = 0.0;
    for (int i = 0; i < N; ++i) {
      const double c = tau * p.harvest_efficiency[0] * std::norm(inst.channels.downlink[0][i](0));
      if (c > best_gain) {
        best_gain = c;
        best_slot = i;
      }
      const double inc = demands(0, i) - covered;
      if (inc > 0.0) {
        if (best_slot < 0) return kInf;
        qq(best_slot) += inc / best_gain;
        cost += tau * inc / best_gain;
        covered = demands(0, i);
      }
    }
  } else {
    RMatrix G = RMatrix::Zero(K * N, N);
    RVector d(K * N);
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < N; ++i) {
        d(k * N + i) = demands(k, i);
        for (int j = 0; j <= i; ++j)
          G(k * N + i, j) = tau * p.harvest_efficiency[k] * std::norm(inst.channels.downlink[k][j](0));
      }
    }
    cost = tau * small_covering_lp(G, d, qq);
  }
  if (q) *q = qq;
  return cost;
}

RVector optimal_server_schedule(const RMatrix& offload_bits) {
  const int N = static_cast<int>(offload_bits.cols());
  RVector cap(N);
  double run = 0.0;
  for (int i = 0; i < N; ++i) {
    cap(i) = run;
    if (i + 1 < N) run += offload_bits.col(i).sum();
  }
  cap(N - 1) = run;
  RVector x(N);
  taut_schedule(cap.data(), N, x.data());
  return x;
}

OracleResult brute_force_tiny(const Instance& inst, const OracleOptions& opts) {
  const ValidationReport vr = validate_instance(inst);
  if (!vr.ok()) throw InvalidArgument("invalid instance: " + vr.violations.front());
  const int K = inst.users();
  const int N = inst.slots();
  if (inst.antennas() != 1 || !((K == 1 && N <= 3) || (K == 2 && N <= 2)))
    throw InvalidArgument("brute_force_tiny supports M = 1 with K = 1, N <= 3 or K = 2, N <= 2");
  if (opts.resolution < 1 || opts.levels < 1) throw InvalidArgument("resolution and levels must be >= 1");
  const auto& p = inst.params;

  Grid g;
  g.inst = &inst;
  g.K = K;
  g.N = N;
  g.dims = 2 * K * (N - 1);
  g.tau = p.slot_duration;
  g.local_coef.resize(K);
  for (int k = 0; k < K; ++k) {
    const double c = p.cycles_per_bit[k];
    g.local_coef(k) = p.capacitance[k] * c * c * c / (g.tau * g.tau);
  }
  g.server_coef = p.server_capacitance * std::pow(p.server_cycles_per_bit, 3) / (g.tau * g.tau);
  g.price = RMatrix::Constant(K, N, kInf);
  for (int k = 0; k < K; ++k) {
    double best = kInf;
    for (int i = 0; i < N; ++i) {
      const double c = p.harvest_efficiency[k] * std::norm(inst.channels.downlink[k][i](0));
      if (c > 0.0) best = std::min(best, 1.0 / c);
      g.price(k, i) = best;
    }
  }
  g.u = RVector::Zero(g.dims);
  for (int k = 0; k < K; ++k) g.avail[k][0] = inst.tasks.bits(k, 0);
  if (N == 1) {
    for (int k = 0; k < K; ++k) g.finish_user(k);
  }
  g.res = opts.resolution;
  g.lo = RVector::Zero(g.dims);
  g.hi = RVector::Ones(g.dims);
  for (int level = 0; level < opts.levels; ++level) {
    if (level > 0) {
      if (g.dims == 0 || !std::isfinite(g.best)) break;
      const double w = 1.0 / opts.resolution;
      for (int d = 0; d < g.dims; ++d) {
        const double width = (g.hi(d) - g.lo(d)) * w;
        g.lo(d) = std::max(0.0, g.best_u(d) - width);
        g.hi(d) = std::min(1.0, g.best_u(d) + width);
      }
    }
    g.visit(0);
  }
  if (!std::isfinite(g.best)) throw InfeasibleError("no grid point meets the energy demands");

  // Rebuild the incumbent.
  g.u = g.best_u;
  g.lo = g.best_u;
  g.hi = g.best_u;
  g.res = 1;
  g.best = kInf;
  g.visit(0);

  OracleResult out;
  Allocation& al = out.allocation;
  al = Allocation::zeros(p);
  RMatrix D(K, N);
  for (int k = 0; k < K; ++k) {
    double run = 0.0;
    for (int i = 0; i < N; ++i) {
      al.local_bits(k, i) = g.L[k][i];
      al.offload_bits(k, i) = g.R[k][i];
      D(k, i) = run += g.e[k][i];
    }
  }
  al.server_bits = optimal_server_schedule(al.offload_bits);
  RVector q;
  scalar_transmit_energy(inst, D, &q);
  for (int i = 0; i < N; ++i) al.covariance[i] = CMatrix::Constant(1, 1, Complex(q(i), 0.0));
  out.objective = objective(inst, al);
  out.points = g.points;
  return out;
}

double KktReport::worst() const { return std::max({stationarity, dual_sign, complementarity, psd, beamforming}); }

KktReport verify_kkt(const Instance& inst, const SolveReport& report) {
  const auto& p = inst.params;
  const int K = inst.users();
  const int N = inst.slots();
  const double tau = p.slot_duration;
  const Allocation& al = report.allocation;
  const bool has_local = report.scheme != Scheme::kFullOffload;
  const bool has_offload = report.scheme != Scheme::kLocalOnly;

  KktReport out;
  out.multipliers = DualPoint::zeros(p);
  auto note = [&](double& field, double value, const std::string& what) {
    if (value > field) {
      field = value;
      if (value >= out.worst()) out.worst_condition = what;
    }
  };

  const RMatrix demands = energy_demands(inst, al.local_bits, al.offload_bits);
  RMatrix y = RMatrix::Zero(K, N);
  if (demands.maxCoeff() > 0.0) {
    const SdpResult sdp = solve_wpt_sdp(inst, demands);
    y = sdp_kkt_residuals(inst, demands, sdp.covariance).multipliers;
    double transmit = 0.0;
    for (const auto& q : al.covariance) transmit += tau * q.trace().real();
    note(out.beamforming, std::max(0.0, transmit - sdp.objective) / std::max(report.primal_objective, 1e-300),
         "beamforming optimality");
  }
  out.multipliers.energy = y;
  const RMatrix Lambda = suffix_sums(y);

  const double bits_scale = std::max(1.0, inst.total_arrivals());
  const double tol_bits = 1e-9 * bits_scale;
  const double a0 = p.server_capacitance * std::pow(p.server_cycles_per_bit, 3) / (tau * tau);

  // AP prices V_i = sum_{j>=i} nu_j.
  RVector V = RVector::Zero(N + 1);
  if (has_offload) {
    for (int i = N - 1; i >= 0; --i) {
      const double l0 = al.server_bits(i);
      V(i) = l0 > tol_bits ? -3.0 * a0 * l0 * l0 : (i + 1 < N ? std::max(0.0, V(i + 1)) : 0.0);
    }
  }
  // User prices M_{k,i} = sum_{j>=i} mu_{k,j}.
  RMatrix Mu = RMatrix::Zero(K, N + 1);
  RMatrix mismatch = RMatrix::Zero(K, N);
  double price_scale = V.cwiseAbs().maxCoeff();
  for (int k = 0; k < K; ++k) {
    const double c = p.cycles_per_bit[k];
    const double a = p.capacitance[k] * c * c * c / (tau * tau);
    std::vector<bool> known(N, false);
    RVector lower = RVector::Constant(N, -kInf);
    for (int i = 0; i < N; ++i) {
      const double gain = inst.channels.uplink_gain(k, i);
      const double slope0 = p.noise_power * std::numbers::ln2 / (gain * p.bandwidth);
      const double L = al.local_bits(k, i);
      const double R = al.offload_bits(k, i);
      const bool can_offload = has_offload && i + 1 < N;
      const bool pos_l = has_local && L > tol_bits;
      const bool pos_r = can_offload && R > tol_bits;
      const double mL = -3.0 * Lambda(k, i) * a * L * L;
      const double mR = V(i + 1) - Lambda(k, i) * slope0 * std::exp2(R / (tau * p.bandwidth));
      if (pos_l) {
        Mu(k, i) = mL;
        if (pos_r) mismatch(k, i) = std::abs(mL - mR);
        else if (can_offload) mismatch(k, i) = std::max(0.0, mR - mL);  // offloading would pay
      } else if (pos_r) {
        Mu(k, i) = mR;
        if (has_local) mismatch(k, i) = std::max(0.0, -mR);  // local execution would pay
      } else {
        if (has_local) lower(i) = 0.0;
        if (can_offload) lower(i) = std::max(lower(i), V(i + 1) - Lambda(k, i) * slope0);
        continue;
      }
      known[i] = true;
      price_scale = std::max(price_scale, std::abs(Mu(k, i)));
    }
    // Prices of idle slots only have to respect their bounds and keep the
    // causality multipliers nonnegative: stay as close to the neighbours as
    // the bounds allow.
    for (int i = N - 1; i >= 0; --i) {
      if (known[i]) continue;
      double lo = lower(i);
      if (i + 1 < N) lo = std::max(lo, Mu(k, i + 1));
      int left = i - 1;
      while (left >= 0 && !known[left]) --left;
      if (std::isfinite(lo)) Mu(k, i) = left >= 0 ? std::min(lo, Mu(k, left)) : lo;
      else Mu(k, i) = left >= 0 ? Mu(k, left) : 0.0;
    }
  }
  price_scale = std::max(price_scale, 1e-300);
  note(out.stationarity, mismatch.maxCoeff() / price_scale, "stationarity of user bits");

  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < N; ++i) {
      const double mu = Mu(k, i) - Mu(k, i + 1);
      out.multipliers.user_task(k, i) = mu;
      if (i + 1 < N) {
        note(out.dual_sign, std::max(0.0, -mu) / price_scale, "sign of user task multiplier");
        note(out.complementarity,
             std::abs(mu * report.residuals.user_task_causality(k, i)) / (price_scale * bits_scale),
             "user task complementarity");
      }
    }
  }
  for (int i = 0; i < N; ++i) {
    const double nu = V(i) - V(i + 1);
    out.multipliers.server_task(i) = nu;
    if (i + 1 < N && has_offload) {
      note(out.dual_sign, std::max(0.0, -nu) / price_scale, "sign of AP task multiplier");
      note(out.complementarity, std::abs(nu * report.residuals.ap_task_causality(i)) / (price_scale * bits_scale),
           "AP task complementarity");
    }
  }
  const double energy_scale = std::max(report.primal_objective, 1e-300);
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < N; ++i) {
      note(out.complementarity, std::abs(y(k, i) * report.residuals.energy_causality(k, i)) / energy_scale,
           "energy complementarity");
    }
  }
  for (int i = 0; i < N; ++i) {
    const auto [eig, vec] = min_eig_hermitian(hbar(inst, out.multipliers, i));
    (void)vec;
    note(out.psd, std::max(0.0, -eig), "Hbar positive semidefinite");
  }
  return out;
}

MonotonicityResult check_monotonicity(const SolveReport& report, double tol_bits) {
  if (tol_bits < 0.0) tol_bits = 1e-6 * report.residuals.bits_scale;
  const Allocation& al = report.allocation;
  MonotonicityResult out;
  auto scan = [&](const auto& row, int user) {
    for (int i = 1; i < row.size(); ++i) {
      if (row(i) < row(i - 1) - tol_bits) {
        out = {false, user, i, row(i - 1) - row(i)};
        return true;
      }
    }
    return false;
  };
  for (int k = 0; k < al.local_bits.rows(); ++k) {
    if (scan(al.local_bits.row(k), k)) return out;
  }
  scan(al.server_bits, -1);
  return out;
}

}  // namespace wpmec
