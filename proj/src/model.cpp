#include "wpmec/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wpmec {

Allocation Allocation::zeros(const SystemParams& params) {
  Allocation a;
  a.covariance.assign(params.slots, CMatrix::Zero(params.antennas, params.antennas));
  a.server_bits = RVector::Zero(params.slots);
  a.local_bits = RMatrix::Zero(params.users, params.slots);
  a.offload_bits = RMatrix::Zero(params.users, params.slots);
  return a;
}

DualPoint DualPoint::zeros(const SystemParams& params) {
  DualPoint d;
  d.energy = RMatrix::Zero(params.users, params.slots);
  d.user_task = RMatrix::Zero(params.users, params.slots);
  d.server_task = RVector::Zero(params.slots);
  return d;
}

namespace {

template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

void check_positive(std::vector<std::string>& out, const char* name, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) out.push_back(concat(name, " must be positive and finite (got ", v, ")"));
}

}  // namespace

ValidationReport validate_instance(const Instance& inst) {
  ValidationReport rep;
  auto& out = rep.violations;
  const auto& p = inst.params;

  if (p.antennas < 1) out.push_back(concat("M must be >= 1 (got ", p.antennas, ")"));
  if (p.users < 1) out.push_back(concat("K must be >= 1 (got ", p.users, ")"));
  if (p.slots < 1) out.push_back(concat("N must be >= 1 (got ", p.slots, ")"));
  check_positive(out, "tau", p.slot_duration);
  check_positive(out, "B", p.bandwidth);
  check_positive(out, "sigma2", p.noise_power);
  check_positive(out, "zeta0", p.server_capacitance);
  check_positive(out, "C0", p.server_cycles_per_bit);
  if (!out.empty() && (p.users < 1 || p.slots < 1 || p.antennas < 1)) return rep;

  const auto K = static_cast<std::size_t>(p.users);
  const int N = p.slots;
  const int M = p.antennas;

  auto check_user_vector = [&](const char* name, const std::vector<double>& v, bool efficiency) {
    if (v.size() != K) {
      out.push_back(concat("dimension mismatch: ", name, " has ", v.size(), " entries, expected K = ", K));
      return;
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double x = v[k];
      const bool bad = efficiency ? !(x > 0.0 && x <= 1.0) : !(x > 0.0);
      if (bad || !std::isfinite(x)) {
        out.push_back(concat(name, "[", k, "] out of range (got ", x, ")"));
      }
    }
  };
  check_user_vector("eta_k", p.harvest_efficiency, true);
  check_user_vector("zeta_k", p.capacitance, false);
  check_user_vector("C_k", p.cycles_per_bit, false);

  const auto& h = inst.channels.downlink;
  if (h.size() != K) {
    out.push_back(concat("dimension mismatch: channels.h has ", h.size(), " users, expected K = ", K));
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      if (h[k].size() != static_cast<std::size_t>(N)) {
        out.push_back(concat("dimension mismatch: channels.h[", k, "] has ", h[k].size(), " slots, expected N = ", N));
        continue;
      }
      for (int i = 0; i < N; ++i) {
        const auto& v = h[k][i];
        if (v.size() != M) {
          out.push_back(concat("dimension mismatch: channels.h[", k, "][", i, "] has length ", v.size(),
                               ", expected M = ", M));
        } else if (!v.allFinite()) {
          out.push_back(concat("downlink channel not finite at user ", k, " slot ", i));
        }
      }
    }
  }

  const auto& g = inst.channels.uplink_gain;
  if (g.rows() != p.users || g.cols() != N) {
    out.push_back(concat("dimension mismatch: channels.g is ", g.rows(), "x", g.cols(), ", expected ", K, "x", N));
  } else {
    for (int k = 0; k < p.users; ++k) {
      for (int i = 0; i < N; ++i) {
        const double x = g(k, i);
        if (!(x > 0.0) || !std::isfinite(x)) {
          out.push_back(concat("uplink gain nonpositive at user ", k, " slot ", i, " (got ", x, ")"));
        }
      }
    }
  }

  const auto& A = inst.tasks.bits;
  if (A.rows() != p.users || A.cols() != N) {
    out.push_back(concat("dimension mismatch: tasks.A is ", A.rows(), "x", A.cols(), ", expected ", K, "x", N));
  } else {
    for (int k = 0; k < p.users; ++k) {
      for (int i = 0; i < N; ++i) {
        const double x = A(k, i);
        if (!(x >= 0.0) || !std::isfinite(x)) {
          out.push_back(concat("negative or non-finite arrival at user ", k, " slot ", i, " (got ", x, ")"));
        }
      }
    }
  }
  return rep;
}

RMatrix suffix_sums(const RMatrix& values) {
  RMatrix out(values.rows(), values.cols());
  if (values.cols() == 0) return out;
  const auto last = values.cols() - 1;
  out.col(last) = values.col(last);
  for (auto i = last; i-- > 0;) out.col(i) = out.col(i + 1) + values.col(i);
  return out;
}

RVector suffix_sums(const RVector& values) {
  const auto n = values.size();
  RVector out = RVector::Zero(n + 1);
  for (auto i = n; i-- > 0;) out(i) = out(i + 1) + values(i);
  return out;
}

CMatrix hbar(const Instance& inst, const DualPoint& dual, int slot) {
  const int N = inst.slots();
  if (slot < 0 || slot >= N) {
    throw std::out_of_range("hbar: slot " + std::to_string(slot) + " outside [0, " + std::to_string(N) + ")");
  }
  const int M = inst.antennas();
  CMatrix h = CMatrix::Identity(M, M);
  for (int k = 0; k < inst.users(); ++k) {
    const double weight = dual.energy.row(k).segment(slot, N - slot).sum() * inst.params.harvest_efficiency[k];
    const CVector& v = inst.channels.downlink[k][slot];
    h.noalias() -= weight * (v * v.adjoint());
  }
  // The outer products carry rounding noise off the real diagonal.
  return 0.5 * (h + h.adjoint());
}

}  // namespace wpmec
