#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "wpmec/experiments.hpp"
#include "wpmec/errors.hpp"
#include "wpmec/model.hpp"

namespace wpmec::test {

// Hand-built instance with identical users and constant channels.
inline Instance flat_instance(int K, int N, int M = 1, double h_amp = 1e-2, double g = 1e-6, double bits = 1e5) {
  Instance inst;
  auto& p = inst.params;
  p.antennas = M;
  p.users = K;
  p.slots = N;
  p.harvest_efficiency.assign(K, 0.3);
  p.capacitance.assign(K, 1e-28);
  p.cycles_per_bit.assign(K, 1e3);
  inst.channels.downlink.assign(K, std::vector<CVector>(N, CVector::Zero(M)));
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < N; ++i) inst.channels.downlink[k][i](k % M) = Complex(h_amp, 0.0);
  inst.channels.uplink_gain = RMatrix::Constant(K, N, g);
  inst.tasks.bits = RMatrix::Constant(K, N, bits);
  return inst;
}

inline ExperimentConfig small_config(int M, int K, int N) {
  ExperimentConfig cfg;
  cfg.M = M;
  cfg.K = K;
  cfg.N = N;
  cfg.final_slot_arrivals = false;
  return cfg;
}

inline Instance random_instance(int M, int K, int N, std::uint64_t seed, bool final_slot_arrivals = true) {
  ExperimentConfig cfg = small_config(M, K, N);
  cfg.final_slot_arrivals = final_slot_arrivals;
  return gen_instance(cfg, seed);
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace wpmec::test
