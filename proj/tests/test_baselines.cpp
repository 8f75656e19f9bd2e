#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "wpmec/baselines.hpp"
#include "wpmec/energy.hpp"
#include "wpmec/oracle.hpp"

using namespace wpmec;
using wpmec::test::flat_instance;
using wpmec::test::random_instance;
using wpmec::test::rel_diff;

TEST_CASE("every scheme spends nothing without tasks") {
  Instance inst = random_instance(2, 2, 3, 1);
  inst.tasks.bits.setZero();
  CHECK(solve_local_only(inst).primal_objective == 0.0);
  CHECK(solve_full_offloading(inst).primal_objective == 0.0);
  CHECK(solve_myopic(inst).primal_objective == 0.0);
  CHECK(solve_separate(inst).primal_objective == 0.0);
}

TEST_CASE("full offloading cannot serve a single slot") {
  Instance inst = flat_instance(1, 1, 1);
  CHECK_THROWS_AS(solve_full_offloading(inst), InfeasibleError);
  CHECK_THROWS_AS(solve_scheme(inst, Scheme::kFullOffload), InfeasibleError);
}

TEST_CASE("joint is never worse than a baseline") {
  SolveOptions opts;
  opts.gap_tol = 1e-6;
  for (int t = 0; t < 8; ++t) {
    const int M = 1 + t % 3, K = 1 + t % 3, N = 3 + t % 3;
    const Instance inst = random_instance(M, K, N, 800 + t, false);
    const SolveReport joint = solve(inst, opts);
    CAPTURE(t);
    REQUIRE(joint.feasibility.feasible);
    for (Scheme s : {Scheme::kLocalOnly, Scheme::kFullOffload, Scheme::kMyopic, Scheme::kSeparate}) {
      const SolveReport r = solve_scheme(inst, s, opts);
      CAPTURE(to_string(s));
      CHECK(r.feasibility.feasible);
      CHECK(r.scheme == s);
      CHECK(r.allocation.offload_bits.col(N - 1).cwiseAbs().maxCoeff() == 0.0);
      CHECK(joint.primal_objective <= r.primal_objective * (1 + 1e-6));
    }
  }
}

TEST_CASE("local only splits a single arrival evenly") {
  // Constant channels make energy equally priced in both slots, so the
  // cubic cost is balanced.
  Instance inst = flat_instance(1, 2, 1);
  inst.tasks.bits << 4e5, 0.0;
  SolveOptions opts;
  opts.gap_tol = 1e-8;
  const SolveReport r = solve_local_only(inst, opts);
  CHECK(rel_diff(r.allocation.local_bits(0, 0), 2e5) < 1e-3);
  CHECK(rel_diff(r.allocation.local_bits(0, 1), 2e5) < 1e-3);
  CHECK(r.allocation.offload_bits.cwiseAbs().maxCoeff() == 0.0);

  // Against a direct scan over the split.
  const double per_joule = 1.0 / (0.3 * 1e-4);  // transmit energy per harvested joule
  double best = INFINITY;
  for (int j = 0; j <= 4000; ++j) {
    const double l = 4e5 * j / 4000.0;
    const double e = local_energy(1e-28, 1e3, l, 0.1) + local_energy(1e-28, 1e3, 4e5 - l, 0.1);
    best = std::min(best, per_joule * e);
  }
  CHECK(rel_diff(r.primal_objective, best) < 1e-4);
}

TEST_CASE("myopic single active slot matches a scan over the offload split") {
  Instance inst = flat_instance(1, 2, 1, 1e-2, 2e-6);
  inst.tasks.bits << 5e5, 0.0;
  const SolveReport r = solve_myopic(inst);
  const double per_joule = 1.0 / (0.3 * 1e-4);  // transmit energy per harvested joule
  double best = INFINITY;
  const int n = 200000;
  for (int j = 0; j <= n; ++j) {
    const double off = 5e5 * j / n;
    const double user = local_energy(1e-28, 1e3, 5e5 - off, 0.1) + offload_energy(2e-6, off, 0.1, 2e6, 1e-9);
    const double ap = local_energy(1e-29, 1e3, off, 0.1);
    best = std::min(best, per_joule * user + ap);
  }
  CHECK(rel_diff(r.primal_objective, best) < 1e-6);
  CHECK(r.feasibility.feasible);
}

TEST_CASE("separate design matches joint when offloading is cheap") {
  // With one user, one antenna and constant channels the beamforming cost is
  // a fixed multiple of the user energy, so only the AP computing separates
  // the two designs; a cheap AP removes that too.
  Instance inst = flat_instance(1, 4, 1, 1e-2, 1e-3);
  inst.params.server_capacitance = 1e-32;
  inst.tasks.bits << 3e5, 6e5, 2e5, 0.0;
  SolveOptions opts;
  opts.gap_tol = 1e-7;
  const SolveReport joint = solve(inst, opts);
  const SolveReport sep = solve_separate(inst, opts);
  CHECK(rel_diff(joint.primal_objective, sep.primal_objective) < 1e-3);
  CHECK(joint.primal_objective <= sep.primal_objective * (1 + 1e-6));
}

TEST_CASE("myopic forbids carrying energy across slots") {
  const Instance inst = random_instance(2, 2, 4, 9, false);
  const SolveReport r = solve_myopic(inst);
  REQUIRE(r.feasibility.feasible);
  // The covariance of slot i powers exactly the consumption of slot i.
  const RMatrix& E = r.residuals.energy_causality;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 4; ++i) CHECK(E(k, i) >= -1e-9 * r.residuals.energy_scale);
  // Every slot completes its own arrivals.
  const RMatrix done = r.allocation.local_bits + r.allocation.offload_bits;
  CHECK((done - inst.tasks.bits).cwiseAbs().maxCoeff() <= 1e-9 * inst.total_arrivals());
}
