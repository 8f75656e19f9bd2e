#include "wpmec/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nnls.hpp"
#include "wpmec/energy.hpp"
#include "wpmec/errors.hpp"

namespace wpmec {

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kZeroDemand: return "zero_demand";
    case SdpStatus::kNumerical: return "numerical";
  }
  return "unknown";
}

RMatrix energy_demands(const Instance& inst, const RMatrix& L, const RMatrix& R) {
  const auto& p = inst.params;
  const int K = p.users;
  const int N = p.slots;
  if (L.rows() != K || L.cols() != N || R.rows() != K || R.cols() != N) {
    throw InvalidArgument("energy_demands: bit arrays must be K x N");
  }
  RMatrix D(K, N);
  for (int k = 0; k < K; ++k) {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      acc += local_energy(p.capacitance[k], p.cycles_per_bit[k], std::max(0.0, L(k, i)), p.slot_duration);
      acc += offload_energy(inst.channels.uplink_gain(k, i), std::max(0.0, R(k, i)), p.slot_duration, p.bandwidth,
                            p.noise_power);
      D(k, i) = acc;
    }
  }
  return D;
}

namespace {

// Real coordinates of an M x M Hermitian matrix: M diagonal entries, then a
// (real, imaginary) pair for every a < b. Basis matrices are E_aa,
// E_ab + E_ba and i E_ab - i E_ba.
struct HermitianBasis {
  struct Entry {
    int kind;  // 0 diagonal, 1 real part, 2 imaginary part
    int a, b;
  };
  int M;
  std::vector<Entry> entries;

  explicit HermitianBasis(int m) : M(m) {
    for (int a = 0; a < M; ++a) entries.push_back({0, a, a});
    for (int a = 0; a < M; ++a) {
      for (int b = a + 1; b < M; ++b) {
        entries.push_back({1, a, b});
        entries.push_back({2, a, b});
      }
    }
  }
  int size() const { return static_cast<int>(entries.size()); }

  // tr(X B_p) for Hermitian X.
  RVector trace_coeffs(const CMatrix& X) const {
    RVector out(size());
    for (int p = 0; p < size(); ++p) {
      const auto& e = entries[p];
      if (e.kind == 0) out(p) = X(e.a, e.a).real();
      else if (e.kind == 1) out(p) = 2.0 * X(e.a, e.b).real();
      else out(p) = 2.0 * X(e.a, e.b).imag();
    }
    return out;
  }

  // h^H B_p h.
  RVector quad_coeffs(const CVector& h) const {
    RVector out(size());
    for (int p = 0; p < size(); ++p) {
      const auto& e = entries[p];
      if (e.kind == 0) {
        out(p) = std::norm(h(e.a));
      } else {
        const Complex w = std::conj(h(e.a)) * h(e.b);
        out(p) = e.kind == 1 ? 2.0 * w.real() : -2.0 * w.imag();
      }
    }
    return out;
  }

  CMatrix matrix(const double* x) const {
    CMatrix Q = CMatrix::Zero(M, M);
    for (int p = 0; p < size(); ++p) {
      const auto& e = entries[p];
      if (e.kind == 0) {
        Q(e.a, e.a) += x[p];
      } else if (e.kind == 1) {
        Q(e.a, e.b) += x[p];
        Q(e.b, e.a) += x[p];
      } else {
        Q(e.a, e.b) += Complex(0.0, x[p]);
        Q(e.b, e.a) -= Complex(0.0, x[p]);
      }
    }
    return Q;
  }

  CMatrix basis(int p) const {
    RVector x = RVector::Zero(size());
    x(p) = 1.0;
    return matrix(x.data());
  }
};

struct Constraint {
  int k, i;
  double d;  // scaled demand
};

class BarrierProblem {
 public:
  BarrierProblem(const HermitianBasis& basis, int N, int K, std::vector<std::vector<RVector>> quad,
                 std::vector<Constraint> cons)
      : basis_(basis), N_(N), K_(K), P_(basis.size()), quad_(std::move(quad)), cons_(std::move(cons)) {}

  int dim() const { return N_ * P_; }
  int barrier_count() const { return N_ * basis_.M + static_cast<int>(cons_.size()); }
  const std::vector<Constraint>& constraints() const { return cons_; }

  // Fills per-slot matrices and constraint slacks; false outside the domain.
  bool evaluate(const RVector& x, std::vector<Eigen::LLT<CMatrix>>& chol, RVector& slack) const {
    chol.resize(N_);
    for (int j = 0; j < N_; ++j) {
      chol[j].compute(basis_.matrix(x.data() + j * P_));
      if (chol[j].info() != Eigen::Success) return false;
      const auto& Lm = chol[j].matrixLLT();
      for (int a = 0; a < basis_.M; ++a) {
        if (!(Lm(a, a).real() > 0.0)) return false;
      }
    }
    slack.resize(static_cast<Eigen::Index>(cons_.size()));
    RMatrix u(K_, N_);
    for (int k = 0; k < K_; ++k) {
      for (int j = 0; j < N_; ++j) u(k, j) = quad_[k][j].dot(x.segment(j * P_, P_));
    }
    for (std::size_t c = 0; c < cons_.size(); ++c) {
      const auto& cn = cons_[c];
      const double s = u.row(cn.k).head(cn.i + 1).sum() - cn.d;
      if (!(s > 0.0)) return false;
      slack(static_cast<Eigen::Index>(c)) = s;
    }
    return true;
  }

  double value(const RVector& x, double t, const std::vector<Eigen::LLT<CMatrix>>& chol,
               const RVector& slack) const {
    double f = 0.0;
    for (int j = 0; j < N_; ++j) {
      f += t * x.segment(j * P_, basis_.M).sum();
      const auto& Lm = chol[j].matrixLLT();
      for (int a = 0; a < basis_.M; ++a) f -= 2.0 * std::log(Lm(a, a).real());
    }
    f -= slack.array().log().sum();
    return f;
  }

  double trace_sum(const RVector& x) const {
    double s = 0.0;
    for (int j = 0; j < N_; ++j) s += x.segment(j * P_, basis_.M).sum();
    return s;
  }

  void derivatives(const RVector& x, double t, const std::vector<Eigen::LLT<CMatrix>>& chol, const RVector& slack,
                   RVector& grad, RMatrix& hess) const {
    (void)x;
    const int n = dim();
    const int M = basis_.M;
    grad = RVector::Zero(n);
    hess = RMatrix::Zero(n, n);
    const CMatrix I = CMatrix::Identity(M, M);
    for (int j = 0; j < N_; ++j) {
      const CMatrix W = chol[j].solve(I);
      grad.segment(j * P_, M).array() += t;
      grad.segment(j * P_, P_) -= basis_.trace_coeffs(W);
      for (int p = 0; p < P_; ++p) {
        const CMatrix X = W * basis_.basis(p) * W;
        hess.block(j * P_ + p, j * P_, 1, P_) = basis_.trace_coeffs(X).transpose();
      }
    }
    // inv[k][m] = sum over constraints of user k with i >= m of 1/s, and the
    // same for 1/s^2.
    RMatrix inv1 = RMatrix::Zero(K_, N_ + 1);
    RMatrix inv2 = RMatrix::Zero(K_, N_ + 1);
    for (std::size_t c = 0; c < cons_.size(); ++c) {
      const double s = slack(static_cast<Eigen::Index>(c));
      inv1(cons_[c].k, cons_[c].i) += 1.0 / s;
      inv2(cons_[c].k, cons_[c].i) += 1.0 / (s * s);
    }
    for (int k = 0; k < K_; ++k) {
      for (int m = N_ - 1; m >= 0; --m) {
        inv1(k, m) += inv1(k, m + 1);
        inv2(k, m) += inv2(k, m + 1);
      }
    }
    for (int k = 0; k < K_; ++k) {
      for (int j = 0; j < N_; ++j) {
        grad.segment(j * P_, P_) -= inv1(k, j) * quad_[k][j];
        for (int l = 0; l <= j; ++l) {
          const double w = inv2(k, j);  // max(j, l) = j
          if (w == 0.0) continue;
          hess.block(j * P_, l * P_, P_, P_).noalias() += w * quad_[k][j] * quad_[k][l].transpose();
        }
      }
    }
    // Mirror the lower block triangle.
    for (int j = 0; j < N_; ++j) {
      for (int l = 0; l < j; ++l) {
        hess.block(l * P_, j * P_, P_, P_) = hess.block(j * P_, l * P_, P_, P_).transpose();
      }
    }
  }

 private:
  const HermitianBasis& basis_;
  int N_, K_, P_;
  std::vector<std::vector<RVector>> quad_;
  std::vector<Constraint> cons_;
};

}  // namespace

SdpResult solve_wpt_sdp(const Instance& inst, const RMatrix& demands, const SdpOptions& opts) {
  const auto& p = inst.params;
  const int K = p.users;
  const int N = p.slots;
  const int M = p.antennas;
  const double tau = p.slot_duration;
  if (demands.rows() != K || demands.cols() != N) throw InvalidArgument("solve_wpt_sdp: demands must be K x N");
  if (!demands.allFinite() || demands.minCoeff() < 0.0) {
    throw InvalidArgument("solve_wpt_sdp: demands must be finite and nonnegative");
  }

  SdpResult res;
  res.covariance.assign(N, CMatrix::Zero(M, M));
  res.multipliers = RMatrix::Zero(K, N);
  const double dmax = demands.maxCoeff();
  if (dmax == 0.0) {
    res.status = SdpStatus::kZeroDemand;
    return res;
  }

  // Cumulative channel energy; its smallest positive value fixes the scale.
  RMatrix cum(K, N);
  double smin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      acc += inst.channels.downlink[k][i].squaredNorm();
      cum(k, i) = acc;
      if (acc > 0.0) smin = std::min(smin, acc);
      if (acc == 0.0 && demands(k, i) > 0.0) {
        throw InfeasibleError("solve_wpt_sdp: user " + std::to_string(k) +
                              " has positive energy demand but no downlink channel up to slot " + std::to_string(i));
      }
    }
  }
  const double eta_min = *std::min_element(p.harvest_efficiency.begin(), p.harvest_efficiency.end());
  const double alpha = 2.0 * dmax / (tau * eta_min * smin);

  HermitianBasis basis(M);
  const int P = basis.size();
  std::vector<std::vector<RVector>> quad(K, std::vector<RVector>(N));
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < N; ++j) quad[k][j] = basis.quad_coeffs(inst.channels.downlink[k][j]);
  }
  std::vector<Constraint> cons;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < N; ++i) {
      if (cum(k, i) == 0.0) continue;  // 0 >= 0 holds identically
      cons.push_back({k, i, demands(k, i) / (tau * p.harvest_efficiency[k] * alpha)});
    }
  }
  BarrierProblem bp(basis, N, K, std::move(quad), std::move(cons));

  const int n = bp.dim();
  RVector x = RVector::Zero(n);
  for (int j = 0; j < N; ++j) x.segment(j * P, M).setOnes();

  std::vector<Eigen::LLT<CMatrix>> chol, chol_try;
  RVector slack, slack_try;
  if (!bp.evaluate(x, chol, slack)) throw NumericalError("solve_wpt_sdp: starting point is not strictly feasible");

  const double m = bp.barrier_count();
  double t = m / bp.trace_sum(x);
  RVector grad;
  RMatrix hess;
  bool stalled = false;
  for (int round = 0; round < opts.max_rounds; ++round) {
    res.rounds = round + 1;
    for (int it = 0; it < opts.max_newton_per_round; ++it) {
      bp.derivatives(x, t, chol, slack, grad, hess);
      Eigen::LLT<RMatrix> hl(hess);
      RVector dx;
      if (hl.info() == Eigen::Success) {
        dx = hl.solve(-grad);
      } else {
        dx = hess.ldlt().solve(-grad);
      }
      const double dec2 = -grad.dot(dx);
      ++res.newton_steps;
      if (!(dec2 > 0.0) || !std::isfinite(dec2)) {
        stalled = dec2 <= 0.0 ? false : true;
        break;
      }
      if (dec2 < 1e-14) break;
      const double f0 = bp.value(x, t, chol, slack);
      double step = 1.0;
      bool accepted = false;
      while (step > 1e-16) {
        RVector xt = x + step * dx;
        if (bp.evaluate(xt, chol_try, slack_try) &&
            bp.value(xt, t, chol_try, slack_try) <= f0 - 0.25 * step * dec2) {
          x = std::move(xt);
          chol.swap(chol_try);
          slack.swap(slack_try);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        stalled = true;
        break;
      }
    }
    const double obj = bp.trace_sum(x);
    res.gap_rel = m / (t * std::max(obj, 1e-300));
    if (res.gap_rel <= opts.target_gap_rel) break;
    if (stalled) break;
    t *= opts.barrier_factor;
  }

  res.objective = 0.0;
  for (int j = 0; j < N; ++j) {
    CMatrix Q = alpha * basis.matrix(x.data() + j * P);
    res.covariance[j] = 0.5 * (Q + Q.adjoint());
    res.objective += tau * res.covariance[j].trace().real();
  }
  // y~ = 1 / (t s) on the central path; physical y = y~ / eta_k.
  res.dual_objective = 0.0;
  const auto& cl = bp.constraints();
  for (std::size_t c = 0; c < cl.size(); ++c) {
    const double ys = 1.0 / (t * slack(static_cast<Eigen::Index>(c)));
    res.multipliers(cl[c].k, cl[c].i) = ys / p.harvest_efficiency[cl[c].k];
    res.dual_objective += res.multipliers(cl[c].k, cl[c].i) * demands(cl[c].k, cl[c].i);
  }
  if (stalled && res.gap_rel > 1e-6) {
    res.status = SdpStatus::kNumerical;
    res.message = "Newton stalled at relative gap " + std::to_string(res.gap_rel);
  }
  return res;
}

double SdpKktReport::worst() const {
  return std::max({primal_violation, psd_violation, dual_infeasibility, complementarity, stationarity});
}

SdpKktReport sdp_kkt_residuals(const Instance& inst, const RMatrix& D, const std::vector<CMatrix>& Q) {
  const auto& p = inst.params;
  const int K = p.users;
  const int N = p.slots;
  const int M = p.antennas;
  const double tau = p.slot_duration;
  SdpKktReport rep;
  rep.min_eig_q = RVector::Zero(N);
  rep.min_eig_z = RVector::Constant(N, tau);
  rep.multipliers = RMatrix::Zero(K, N);
  if (D.rows() != K || D.cols() != N || static_cast<int>(Q.size()) != N) {
    rep.primal_violation = std::numeric_limits<double>::infinity();
    return rep;
  }

  const double dscale = std::max(D.maxCoeff(), 1e-300);
  double max_trace = 0.0;
  double max_fro = 0.0;
  double objective = 0.0;
  for (int j = 0; j < N; ++j) {
    max_trace = std::max(max_trace, Q[j].trace().real());
    max_fro = std::max(max_fro, Q[j].norm());
    objective += tau * Q[j].trace().real();
  }

  RMatrix slack(K, N);
  for (int k = 0; k < K; ++k) {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      const CVector& h = inst.channels.downlink[k][i];
      acc += tau * p.harvest_efficiency[k] * h.dot(Q[i] * h).real();
      slack(k, i) = acc - D(k, i);
      rep.primal_violation = std::max(rep.primal_violation, -slack(k, i) / dscale);
    }
  }
  for (int j = 0; j < N; ++j) {
    const CMatrix H = 0.5 * (Q[j] + Q[j].adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
    rep.min_eig_q(j) = es.eigenvalues()(0);
    if (max_trace > 0.0) rep.psd_violation = std::max(rep.psd_violation, -rep.min_eig_q(j) / max_trace);
  }

  // Multipliers from Z_j Q_j = 0 on nearly active constraints:
  // sum_{(k,i) active, i>=j} y eta_k h h^H Q_j = Q_j.
  const double active_tol = 1e-6 * dscale;
  std::vector<std::pair<int, int>> active;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < N; ++i) {
      if (slack(k, i) <= active_tol && D(k, i) > 0.0) active.emplace_back(k, i);
    }
  }
  if (!active.empty() && max_fro > 0.0) {
    const int rows_per_slot = 2 * M * M;
    RMatrix A = RMatrix::Zero(N * rows_per_slot, static_cast<Eigen::Index>(active.size()));
    RVector b(N * rows_per_slot);
    for (int j = 0; j < N; ++j) {
      const CMatrix& Qj = Q[j];
      for (int a = 0; a < M; ++a) {
        for (int c = 0; c < M; ++c) {
          b(j * rows_per_slot + 2 * (a * M + c)) = Qj(a, c).real();
          b(j * rows_per_slot + 2 * (a * M + c) + 1) = Qj(a, c).imag();
        }
      }
      for (std::size_t col = 0; col < active.size(); ++col) {
        const auto [k, i] = active[col];
        if (i < j) continue;
        const CVector& h = inst.channels.downlink[k][j];
        const CMatrix G = p.harvest_efficiency[k] * (h * (h.adjoint() * Qj));
        for (int a = 0; a < M; ++a) {
          for (int c = 0; c < M; ++c) {
            A(j * rows_per_slot + 2 * (a * M + c), col) = G(a, c).real();
            A(j * rows_per_slot + 2 * (a * M + c) + 1, col) = G(a, c).imag();
          }
        }
      }
    }
    const RVector y = detail::nnls(A, b);
    for (std::size_t col = 0; col < active.size(); ++col) {
      rep.multipliers(active[col].first, active[col].second) = y(static_cast<Eigen::Index>(col));
    }
  }

  double comp = 0.0;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < N; ++i) comp = std::max(comp, std::abs(rep.multipliers(k, i) * slack(k, i)));
  }
  for (int j = 0; j < N; ++j) {
    CMatrix Z = tau * CMatrix::Identity(M, M);
    for (int k = 0; k < K; ++k) {
      const double ysum = rep.multipliers.row(k).tail(N - j).sum();
      if (ysum == 0.0) continue;
      const CVector& h = inst.channels.downlink[k][j];
      Z.noalias() -= ysum * tau * p.harvest_efficiency[k] * (h * h.adjoint());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(Z, Eigen::EigenvaluesOnly);
    rep.min_eig_z(j) = es.eigenvalues()(0);
    rep.dual_infeasibility = std::max(rep.dual_infeasibility, -rep.min_eig_z(j) / tau);
    comp = std::max(comp, std::abs((Z * Q[j]).trace().real()));
    if (max_fro > 0.0) rep.stationarity = std::max(rep.stationarity, (Z * Q[j]).norm() / (tau * max_fro));
  }
  rep.complementarity = objective > 0.0 ? comp / objective : comp;
  return rep;
}

}  // namespace wpmec
