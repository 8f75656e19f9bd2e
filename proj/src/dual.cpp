#include "wpmec/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "wpmec/errors.hpp"
#include "wpmec/hermitian.hpp"

namespace wpmec {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// H-bar is compared against the identity, so an absolute tolerance is fine.
constexpr double kPsdTolerance = 1e-12;

void check_shape(const Instance& inst, const DualPoint& dual) {
  const int K = inst.users();
  const int N = inst.slots();
  if (dual.energy.rows() != K || dual.energy.cols() != N || dual.user_task.rows() != K ||
      dual.user_task.cols() != N || dual.server_task.size() != N) {
    throw InvalidArgument("dual point shape does not match the instance (expected K=" + std::to_string(K) +
                          ", N=" + std::to_string(N) + ")");
  }
}

void check_index(const Instance& inst, int user, int slot) {
  if (user < 0 || user >= inst.users() || slot < 0 || slot >= inst.slots()) {
    throw InvalidArgument("user/slot index out of range");
  }
}

}  // namespace

double server_bits_minimizer(double V, double tau, double capacitance, double cycles_per_bit) {
  if (V >= 0.0) return 0.0;
  const double c3 = cycles_per_bit * cycles_per_bit * cycles_per_bit;
  return std::sqrt(tau * tau * (-V) / (3.0 * capacitance * c3));
}

double local_bits_minimizer(double M, double Lambda, double tau, double capacitance, double cycles_per_bit) {
  if (M >= 0.0) return 0.0;
  const double c3 = cycles_per_bit * cycles_per_bit * cycles_per_bit;
  return std::sqrt(tau * tau * (-M) / (3.0 * Lambda * capacitance * c3));
}

double offload_bits_minimizer(double P, double Lambda, double gain, double tau, double bandwidth,
                              double noise_power) {
  if (P <= 0.0) return 0.0;
  const double arg = P * bandwidth * gain / (Lambda * noise_power * kLn2);
  if (!(arg > 1.0)) return 0.0;
  return tau * bandwidth * std::log2(arg);
}

DualProblem::DualProblem(const Instance& inst, Variant variant, double eps_lambda)
    : inst_(&inst), variant_(variant), eps_lambda_(eps_lambda) {
  const auto& p = inst.params;
  K_ = p.users;
  N_ = p.slots;
  M_ = p.antennas;
  const double tau = p.slot_duration;
  outer_.reserve(static_cast<std::size_t>(K_) * N_);
  local_coef_.resize(K_);
  offload_coef_.resize(K_, N_);
  offload_threshold_.resize(K_, N_);
  for (int k = 0; k < K_; ++k) {
    const double c = p.cycles_per_bit[k];
    local_coef_(k) = p.capacitance[k] * c * c * c / (tau * tau);
    for (int i = 0; i < N_; ++i) {
      const CVector& h = inst.channels.downlink[k][i];
      outer_.push_back(p.harvest_efficiency[k] * (h * h.adjoint()));
      const double g = inst.channels.uplink_gain(k, i);
      offload_coef_(k, i) = tau * p.noise_power / g;
      offload_threshold_(k, i) = p.noise_power * kLn2 / (g * p.bandwidth);
    }
  }
  const double c0 = p.server_cycles_per_bit;
  server_coef_ = p.server_capacitance * c0 * c0 * c0 / (tau * tau);
}

int DualProblem::dimension() const { return 2 * K_ * N_ + (has_server_block() ? N_ : 0); }

RVector DualProblem::flatten(const DualPoint& dual) const {
  check_shape(*inst_, dual);
  RVector x(dimension());
  const int KN = K_ * N_;
  for (int k = 0; k < K_; ++k) {
    for (int i = 0; i < N_; ++i) {
      x(k * N_ + i) = dual.energy(k, i);
      x(KN + k * N_ + i) = dual.user_task(k, i);
    }
  }
  if (has_server_block()) x.tail(N_) = dual.server_task;
  return x;
}

DualPoint DualProblem::unflatten(const RVector& x) const {
  if (x.size() != dimension()) throw InvalidArgument("flattened dual vector has the wrong length");
  DualPoint d = DualPoint::zeros(inst_->params);
  const int KN = K_ * N_;
  for (int k = 0; k < K_; ++k) {
    for (int i = 0; i < N_; ++i) {
      d.energy(k, i) = x(k * N_ + i);
      d.user_task(k, i) = x(KN + k * N_ + i);
    }
  }
  if (has_server_block()) d.server_task = x.tail(N_);
  return d;
}

DualProblem::Sums DualProblem::sums(const RVector& x) const {
  Sums s;
  s.energy.resize(K_, N_);
  s.user.resize(K_, N_);
  s.server = RVector::Zero(N_ + 1);
  const int KN = K_ * N_;
  for (int k = 0; k < K_; ++k) {
    double le = 0.0;
    double lu = 0.0;
    for (int i = N_ - 1; i >= 0; --i) {
      le += x(k * N_ + i);
      lu += x(KN + k * N_ + i);
      s.energy(k, i) = le;
      s.user(k, i) = lu;
    }
  }
  if (has_server_block()) {
    for (int i = N_ - 1; i >= 0; --i) s.server(i) = s.server(i + 1) + x(2 * KN + i);
  }
  return s;
}

DualCheck DualProblem::check(const RVector& x) const {
  if (x.size() != dimension()) throw InvalidArgument("flattened dual vector has the wrong length");
  const int n = dimension();
  const int KN = K_ * N_;
  DualCheck out;

  auto sign_cut = [&](int idx, int user, int slot) {
    out.feasible = false;
    out.kind = DualCutKind::kSign;
    out.direction = RVector::Zero(n);
    out.direction(idx) = 1.0;
    out.depth = -x(idx);
    out.user = user;
    out.slot = slot;
    return out;
  };

  for (int k = 0; k < K_; ++k) {
    for (int i = 0; i < N_; ++i) {
      if (x(k * N_ + i) < 0.0) return sign_cut(k * N_ + i, k, i);
    }
    for (int i = 0; i + 1 < N_; ++i) {
      if (x(KN + k * N_ + i) < 0.0) return sign_cut(KN + k * N_ + i, k, i);
    }
  }
  if (has_server_block()) {
    for (int i = 0; i + 1 < N_; ++i) {
      if (x(2 * KN + i) < 0.0) return sign_cut(2 * KN + i, -1, i);
    }
  }

  // With lambda >= 0 the suffix sums are smallest at the last slot, but the
  // check is done everywhere so the cut stays tight.
  for (int k = 0; k < K_; ++k) {
    double suffix = 0.0;
    for (int i = N_ - 1; i >= 0; --i) {
      suffix += x(k * N_ + i);
      if (suffix < eps_lambda_) {
        out.feasible = false;
        out.kind = DualCutKind::kSuffixSum;
        out.direction = RVector::Zero(n);
        out.direction.segment(k * N_ + i, N_ - i).setOnes();
        out.depth = eps_lambda_ - suffix;
        out.user = k;
        out.slot = i;
        return out;
      }
    }
  }

  const Sums s = sums(x);
  double worst = -kPsdTolerance;
  int worst_slot = -1;
  CVector worst_vec;
  CMatrix H(M_, M_);
  for (int i = 0; i < N_; ++i) {
    H.setIdentity();
    for (int k = 0; k < K_; ++k) H.noalias() -= s.energy(k, i) * outer_[k * N_ + i];
    if (M_ == 1) {
      const double e = H(0, 0).real();
      if (e < worst) {
        worst = e;
        worst_slot = i;
        worst_vec = CVector::Ones(1);
      }
      continue;
    }
    if (hermitian_positive_definite(H)) continue;
    const auto [e, v] = min_eig_hermitian(H);
    if (e < worst) {
      worst = e;
      worst_slot = i;
      worst_vec = v;
    }
  }
  if (worst_slot >= 0) {
    const int i = worst_slot;
    out.feasible = false;
    out.kind = DualCutKind::kPsd;
    out.direction = RVector::Zero(n);
    for (int k = 0; k < K_; ++k) {
      const CVector& h = inst_->channels.downlink[k][i];
      const double proj = std::norm(worst_vec.dot(h));
      const double coef = -inst_->params.harvest_efficiency[k] * proj;
      out.direction.segment(k * N_ + i, N_ - i).setConstant(coef);
    }
    out.depth = -worst;
    out.slot = i;
  }
  return out;
}

SubproblemMinimizers DualProblem::minimize(const RVector& x) const {
  const Sums s = sums(x);
  const auto& p = inst_->params;
  const double tau = p.slot_duration;
  SubproblemMinimizers z;
  z.server_bits = RVector::Zero(N_);
  z.local_bits = RMatrix::Zero(K_, N_);
  z.offload_bits = RMatrix::Zero(K_, N_);
  if (has_server_block()) {
    for (int i = 0; i < N_; ++i) {
      z.server_bits(i) = server_bits_minimizer(s.server(i), tau, p.server_capacitance, p.server_cycles_per_bit);
    }
  }
  for (int k = 0; k < K_; ++k) {
    for (int i = 0; i < N_; ++i) {
      const double lam = s.energy(k, i);
      const double mu = s.user(k, i);
      if (variant_ != Variant::kFullOffload && mu < 0.0) {
        z.local_bits(k, i) = std::sqrt(-mu / (3.0 * lam * local_coef_(k)));
      }
      if (variant_ != Variant::kLocalOnly && i + 1 < N_) {
        const double price = s.server(i + 1) - mu;
        if (price > 0.0) {
          const double arg = price / (lam * offload_threshold_(k, i));
          if (arg > 1.0) z.offload_bits(k, i) = tau * p.bandwidth * std::log2(arg);
        }
      }
    }
  }
  return z;
}

double DualProblem::value(const RVector& x, const SubproblemMinimizers& z) const {
  const Sums s = sums(x);
  const auto& p = inst_->params;
  const double rate_unit = p.slot_duration * p.bandwidth;
  const RMatrix& A = inst_->tasks.bits;
  double g = 0.0;
  if (has_server_block()) {
    for (int i = 0; i < N_; ++i) {
      const double l0 = z.server_bits(i);
      g += server_coef_ * l0 * l0 * l0 + s.server(i) * l0;
    }
  }
  for (int k = 0; k < K_; ++k) {
    for (int i = 0; i < N_; ++i) {
      const double lam = s.energy(k, i);
      const double mu = s.user(k, i);
      const double l = z.local_bits(k, i);
      const double r = z.offload_bits(k, i);
      g += lam * local_coef_(k) * l * l * l + mu * l;
      if (r > 0.0) {
        const double e = offload_coef_(k, i) * std::expm1(r / rate_unit * kLn2);
        g += lam * e + (mu - s.server(i + 1)) * r;
      }
      g -= mu * A(k, i);
    }
  }
  return g;
}

RVector DualProblem::subgradient(const SubproblemMinimizers& z) const {
  const auto& p = inst_->params;
  const double rate_unit = p.slot_duration * p.bandwidth;
  const RMatrix& A = inst_->tasks.bits;
  const int KN = K_ * N_;
  RVector s(dimension());
  for (int k = 0; k < K_; ++k) {
    double energy = 0.0;
    double bits = 0.0;
    for (int i = 0; i < N_; ++i) {
      const double l = z.local_bits(k, i);
      const double r = z.offload_bits(k, i);
      energy += local_coef_(k) * l * l * l;
      if (r > 0.0) energy += offload_coef_(k, i) * std::expm1(r / rate_unit * kLn2);
      bits += l + r - A(k, i);
      s(k * N_ + i) = energy;
      s(KN + k * N_ + i) = bits;
    }
  }
  if (has_server_block()) {
    double executed = 0.0;
    double offloaded = 0.0;
    for (int i = 0; i < N_; ++i) {
      executed += z.server_bits(i);
      s(2 * KN + i) = executed - offloaded;
      offloaded += z.offload_bits.col(i).sum();
    }
  }
  return s;
}

DualEvaluation DualProblem::evaluate(const RVector& x) const {
  DualEvaluation ev;
  ev.minimizers = minimize(x);
  ev.value = value(x, ev.minimizers);
  ev.subgradient = subgradient(ev.minimizers);
  return ev;
}

RMatrix DualProblem::energy_price_bounds() const {
  RMatrix u(K_, N_);
  for (int k = 0; k < K_; ++k) {
    double bound = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N_; ++i) {
      const double gain = inst_->params.harvest_efficiency[k] * inst_->channels.downlink[k][i].squaredNorm();
      if (gain > 0.0) bound = std::min(bound, 1.0 / gain);
      u(k, i) = bound;
    }
  }
  return u;
}

DualCheck check_dual_feasible(const Instance& inst, const DualPoint& dual, double eps_lambda) {
  check_shape(inst, dual);
  DualProblem dp(inst, Variant::kJoint, eps_lambda);
  return dp.check(dp.flatten(dual));
}

double solve_L0(const Instance& inst, const DualPoint& dual, int slot) {
  check_shape(inst, dual);
  check_index(inst, 0, slot);
  const auto& p = inst.params;
  const double V = dual.server_task.tail(inst.slots() - slot).sum();
  return server_bits_minimizer(V, p.slot_duration, p.server_capacitance, p.server_cycles_per_bit);
}

double solve_Lk(const Instance& inst, const DualPoint& dual, int user, int slot, double eps_lambda) {
  check_shape(inst, dual);
  check_index(inst, user, slot);
  const int tail = inst.slots() - slot;
  const double lam = dual.energy.row(user).tail(tail).sum();
  if (!(lam >= eps_lambda)) throw InvalidArgument("solve_Lk: energy price suffix sum below eps_lambda");
  const double mu = dual.user_task.row(user).tail(tail).sum();
  const auto& p = inst.params;
  return local_bits_minimizer(mu, lam, p.slot_duration, p.capacitance[user], p.cycles_per_bit[user]);
}

double solve_Rk(const Instance& inst, const DualPoint& dual, int user, int slot, double eps_lambda) {
  check_shape(inst, dual);
  check_index(inst, user, slot);
  const int N = inst.slots();
  const int tail = N - slot;
  const double lam = dual.energy.row(user).tail(tail).sum();
  if (!(lam >= eps_lambda)) throw InvalidArgument("solve_Rk: energy price suffix sum below eps_lambda");
  if (slot == N - 1) return 0.0;
  const double mu = dual.user_task.row(user).tail(tail).sum();
  const double nu = dual.server_task.tail(tail - 1).sum();
  const auto& p = inst.params;
  return offload_bits_minimizer(nu - mu, lam, inst.channels.uplink_gain(user, slot), p.slot_duration, p.bandwidth,
                                p.noise_power);
}

double dual_value(const Instance& inst, const DualPoint& dual, double eps_lambda) {
  check_shape(inst, dual);
  DualProblem dp(inst, Variant::kJoint, eps_lambda);
  const RVector x = dp.flatten(dual);
  const DualCheck c = dp.check(x);
  if (!c.feasible) throw InvalidArgument("dual_value: dual point is infeasible");
  return dp.value(x, dp.minimize(x));
}

RVector dual_subgradient(const Instance& inst, const DualPoint& dual, const SubproblemMinimizers& z) {
  check_shape(inst, dual);
  const int K = inst.users();
  const int N = inst.slots();
  if (z.server_bits.size() != N || z.local_bits.rows() != K || z.local_bits.cols() != N ||
      z.offload_bits.rows() != K || z.offload_bits.cols() != N) {
    throw InvalidArgument("dual_subgradient: minimizer shape does not match the instance");
  }
  return DualProblem(inst).subgradient(z);
}

}  // namespace wpmec
