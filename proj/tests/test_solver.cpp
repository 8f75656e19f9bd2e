#include "doctest.h"

#include <cmath>
#include <random>

#include "support.hpp"
#include "wpmec/dual.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/solver.hpp"

using namespace wpmec;
using wpmec::test::flat_instance;
using wpmec::test::random_instance;
using wpmec::test::rel_diff;

namespace {

PrimalBits bits_of(const SolveReport& r) {
  return {r.allocation.server_bits, r.allocation.local_bits, r.allocation.offload_bits};
}

}  // namespace

TEST_CASE("scheme names round trip") {
  for (Scheme s : {Scheme::kJoint, Scheme::kLocalOnly, Scheme::kFullOffload, Scheme::kMyopic, Scheme::kSeparate})
    CHECK(parse_scheme(to_string(s)) == s);
  CHECK_THROWS_AS(parse_scheme("greedy"), InvalidArgument);
}

TEST_CASE("no tasks means no energy") {
  Instance inst = random_instance(2, 3, 4, 1);
  inst.tasks.bits.setZero();
  const SolveReport r = solve(inst);
  CHECK(r.primal_objective == 0.0);
  CHECK(r.allocation.local_bits.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.allocation.offload_bits.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.allocation.server_bits.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& q : r.allocation.covariance) CHECK(q.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.feasibility.feasible);
}

TEST_CASE("invalid instances are rejected") {
  Instance inst = random_instance(1, 1, 2, 1);
  inst.tasks.bits(0, 0) = -5.0;
  CHECK_THROWS_AS(solve(inst), InvalidArgument);
}

TEST_CASE("closed form fixtures compose in primal recovery") {
  Instance inst = flat_instance(1, 2, 1, 1e-2, 1e-6);
  inst.params.server_capacitance = 1e-28;
  const double P = 8.0 * std::log(2.0) * 1e-9 / (2e6 * 1e-6);  // Lambda = 2 doubles the price for 4e5
  DualPoint d = DualPoint::zeros(inst.params);
  d.energy << 1.0, 1.0;        // Lambda = 2 in slot 0
  d.user_task << -6e-7, 0.0;   // M = -6e-7 in slot 0
  d.server_task << -3e-7 - (P - 6e-7), P - 6e-7;  // V = -3e-7, later sum fixes the offload price
  const PrimalBits b = recover_primal(inst, d);
  CHECK(rel_diff(b.server_bits(0), 1e5) < 1e-9);
  CHECK(rel_diff(b.local_bits(0, 0), 1e5) < 1e-9);
  CHECK(rel_diff(b.offload_bits(0, 0), 4e5) < 1e-9);
  CHECK(b.offload_bits(0, 1) == 0.0);
}

TEST_CASE("recovered bits strictly minimize the Lagrangian") {
  const Instance inst = random_instance(2, 2, 4, 3);
  const SolveReport rep = solve(inst);
  DualProblem dp(inst);
  const RVector x = dp.flatten(rep.dual);
  const SubproblemMinimizers z = dp.minimize(x);
  const double base = dp.value(x, z);
  int perturbed = 0;
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 4; ++i) {
      for (double f : {1 - 1e-3, 1 + 1e-3}) {
        if (z.local_bits(k, i) > 0) {
          SubproblemMinimizers w = z;
          w.local_bits(k, i) *= f;
          CHECK(dp.value(x, w) > base);
          ++perturbed;
        }
        if (z.offload_bits(k, i) > 0) {
          SubproblemMinimizers w = z;
          w.offload_bits(k, i) *= f;
          CHECK(dp.value(x, w) > base);
          ++perturbed;
        }
      }
    }
  }
  for (int i = 0; i < 4; ++i) {
    if (z.server_bits(i) <= 0) continue;
    SubproblemMinimizers w = z;
    w.server_bits(i) *= 1 + 1e-3;
    CHECK(dp.value(x, w) > base);
    ++perturbed;
  }
  CHECK(perturbed > 0);
}

TEST_CASE("repair leaves feasible bits alone") {
  const Instance inst = random_instance(2, 2, 4, 5);
  const SolveReport rep = solve(inst);
  RepairInfo info;
  const PrimalBits out = repair_feasibility(inst, bits_of(rep), Variant::kJoint, &info);
  CHECK(info.magnitude <= 1e-9 * inst.total_arrivals());
  CHECK((out.local_bits - rep.allocation.local_bits).cwiseAbs().maxCoeff() <= 1e-9 * inst.total_arrivals());
}

TEST_CASE("deadline deficit lands on the last local slot") {
  Instance inst = flat_instance(2, 3, 1);
  PrimalBits b{RVector::Zero(3), inst.tasks.bits, RMatrix::Zero(2, 3)};
  b.local_bits(1, 2) -= 7.0;
  RepairInfo info;
  const PrimalBits out = repair_feasibility(inst, b, Variant::kJoint, &info);
  CHECK(out.local_bits(1, 2) == doctest::Approx(b.local_bits(1, 2) + 7.0));
  CHECK(info.applied);
  CHECK(info.magnitude == doctest::Approx(7.0));
  CHECK_FALSE(info.excessive);
}

TEST_CASE("AP execution ahead of the offloaded bits moves later") {
  Instance inst = flat_instance(1, 4, 1);
  inst.tasks.bits << 1e5, 1e5, 1e5, 0;
  PrimalBits b{RVector::Zero(4), RMatrix::Zero(1, 4), RMatrix::Zero(1, 4)};
  b.offload_bits << 1e5, 1e5, 1e5, 0;
  b.server_bits << 0, 2e5, 5e4, 5e4;  // slot 1 runs 1e5 bits that only arrive in slot 2
  const PrimalBits out = repair_feasibility(inst, b, Variant::kJoint);
  Allocation a = Allocation::zeros(inst.params);
  a.server_bits = out.server_bits;
  a.local_bits = out.local_bits;
  a.offload_bits = out.offload_bits;
  const ConstraintReport r = residuals(inst, a);
  CHECK(r.ap_task_causality.minCoeff() >= -1e-9);
  CHECK(std::abs(r.ap_deadline) <= 1e-9);
  CHECK(out.server_bits(1) == doctest::Approx(1e5));
  CHECK(out.server_bits(2) > b.server_bits(2));
}

TEST_CASE("strong duality, feasibility and monotone local execution") {
  for (int t = 0; t < 12; ++t) {
    const int M = 1 + t % 2, K = 1 + t % 3, N = 2 + t % 4;
    const Instance inst = random_instance(M, K, N, 600 + t);
    const SolveReport r = solve(inst);
    CAPTURE(t);
    CHECK(r.duality_gap_rel <= 1e-3);
    CHECK(std::abs(r.primal_objective - r.dual_value) / std::max(r.primal_objective, 1e-12) <= 1e-3);
    CHECK(r.feasibility.feasible);
    CHECK(r.allocation.offload_bits.col(N - 1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(check_monotonicity(r).pass);
    CHECK(verify_kkt(inst, r).ok(1e-3));
  }
}

TEST_CASE("offloading follows the task load under constant channels") {
  // Offloaded bits can only run at the AP from the next slot on, so the
  // offload price of slot i carries the AP prices after i. Whenever the AP
  // price of slot i + 1 does not exceed the user price of slot i, the
  // minimizing offload does not shrink from slot i to i + 1.
  int applicable = 0;
  for (int t = 0; t < 6; ++t) {
    Instance inst = flat_instance(2, 5, 2, 1e-2, 1e-6 * (1 + t));
    std::mt19937_64 rng(700 + t);
    std::uniform_real_distribution<double> u(1e5, 1e6);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 4; ++i) inst.tasks.bits(k, i) = u(rng);
    inst.tasks.bits.col(4).setZero();
    const SolveReport r = solve(inst);
    const PrimalBits z = recover_primal(inst, r.dual);
    for (int k = 0; k < 2; ++k) {
      for (int i = 0; i + 2 < 5; ++i) {
        if (r.dual.server_task(i + 1) > r.dual.user_task(k, i)) continue;
        ++applicable;
        CHECK(z.offload_bits(k, i + 1) >= z.offload_bits(k, i));
      }
    }
  }
  CHECK(applicable > 0);
}

TEST_CASE("iteration trace is recorded on request") {
  const Instance inst = random_instance(1, 1, 3, 8);
  SolveOptions opts;
  opts.trace_stride = 10;
  const SolveReport r = solve(inst, opts);
  CHECK_FALSE(r.trace.empty());
  CHECK(r.iterations > 0);
}
