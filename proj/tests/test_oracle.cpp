#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "wpmec/baselines.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/solver.hpp"

using namespace wpmec;
using wpmec::test::random_instance;
using wpmec::test::rel_diff;

TEST_CASE("grid search on the empty instance") {
  Instance inst = random_instance(1, 1, 3, 1);
  inst.tasks.bits.setZero();
  const OracleResult r = brute_force_tiny(inst, {16, 1});
  CHECK(r.objective == 0.0);
}

TEST_CASE("grid search refuses larger instances") {
  CHECK_THROWS_AS(brute_force_tiny(random_instance(2, 1, 2, 1)), InvalidArgument);
  CHECK_THROWS_AS(brute_force_tiny(random_instance(1, 1, 4, 1)), InvalidArgument);
  CHECK_THROWS_AS(brute_force_tiny(random_instance(1, 2, 3, 1)), InvalidArgument);
}

TEST_CASE("grid search and the joint solver agree on two slots") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Instance inst = random_instance(1, 1, 2, seed);
    const OracleResult o = brute_force_tiny(inst);
    const SolveReport r = solve(inst);
    CHECK(rel_diff(o.objective, r.primal_objective) < 1e-2);
    CHECK(r.primal_objective <= o.objective * (1 + 1e-4));
    // The dual bound never exceeds a feasible objective.
    CHECK(r.dual_value <= o.objective * (1 + 1e-9));
    CHECK(rel_diff(r.dual_value, o.objective) < 1e-3);
  }
}

TEST_CASE("grid search on two users") {
  const Instance inst = random_instance(1, 2, 2, 21);
  const OracleResult o = brute_force_tiny(inst, {16, 2});
  const SolveReport r = solve(inst);
  CHECK(rel_diff(o.objective, r.primal_objective) < 1e-2);
}

TEST_CASE("grid search on three slots") {
  const Instance inst = random_instance(1, 1, 3, 31);
  const OracleResult o = brute_force_tiny(inst, {64, 2});
  const SolveReport r = solve(inst);
  CHECK(rel_diff(o.objective, r.primal_objective) < 1e-2);
  const ConstraintReport res = residuals(inst, o.allocation);
  CHECK(check_feasibility(res).feasible);
  CHECK(rel_diff(objective(inst, o.allocation), o.objective) < 1e-9);
}

TEST_CASE("grid search optimum rises with the load") {
  Instance inst = random_instance(1, 1, 2, 41);
  const double base = brute_force_tiny(inst, {32, 1}).objective;
  inst.tasks.bits *= 2.0;
  CHECK(brute_force_tiny(inst, {32, 1}).objective >= base);
}

TEST_CASE("finer grids never do worse") {
  const Instance inst = random_instance(1, 1, 2, 51);
  double prev = INFINITY;
  for (int res : {8, 16, 32, 64}) {
    const double v = brute_force_tiny(inst, {res, 1}).objective;
    CHECK(v <= prev * (1 + 1e-12));
    prev = v;
  }
}

TEST_CASE("AP schedule") {
  RMatrix R(1, 4);
  R << 4, 0, 0, 0;
  const RVector s = optimal_server_schedule(R);
  CHECK(s(0) == 0.0);
  CHECK(s(1) == doctest::Approx(4.0 / 3));
  CHECK(s(3) == doctest::Approx(4.0 / 3));
  R << 0, 6, 0, 0;  // nothing to run before slot 2
  const RVector t = optimal_server_schedule(R);
  CHECK(t(1) == 0.0);
  CHECK(t(2) == doctest::Approx(3.0));
}

TEST_CASE("scalar transmit energy uses the best channel seen so far") {
  Instance inst = wpmec::test::flat_instance(1, 2, 1, 1e-2);
  inst.channels.downlink[0][1](0) = 2e-2;
  RMatrix D(1, 2);
  D << 3e-6, 3e-6;  // everything needed in slot 0
  RVector q;
  CHECK(rel_diff(scalar_transmit_energy(inst, D, &q), 0.1) < 1e-12);
  D << 0.0, 3e-6;  // the stronger later channel is four times cheaper
  CHECK(rel_diff(scalar_transmit_energy(inst, D), 0.025) < 1e-12);
}

TEST_CASE("KKT report for the solver and for suboptimal allocations") {
  int flagged = 0;
  for (std::uint64_t seed : {61u, 62u, 63u}) {
    const Instance inst = random_instance(2, 2, 4, seed);
    const SolveReport r = solve(inst);
    const KktReport k = verify_kkt(inst, r);
    CAPTURE(k.worst_condition);
    CHECK(k.ok(1e-4));

    // Executing offloaded bits locally breaks stationarity, unless the user
    // harvests more than it needs anyway, in which case the objective does
    // not move either.
    for (int u = 0; u < 2; ++u) {
      PrimalBits b{r.allocation.server_bits, r.allocation.local_bits, r.allocation.offload_bits};
      const double shift = 0.3 * b.offload_bits(u, 1);
      b.offload_bits(u, 1) -= shift;
      b.local_bits(u, 1) += shift;
      const SolveReport bad = evaluate_bits(inst, b, Scheme::kJoint, {});
      if (bad.primal_objective <= r.primal_objective * (1 + 1e-3)) continue;
      ++flagged;
      CHECK(verify_kkt(inst, bad).worst() > 1e-3);
    }
  }
  CHECK(flagged >= 2);
}

TEST_CASE("KKT report flags myopic allocations") {
  const Instance inst = random_instance(2, 2, 4, 71, false);
  CHECK(verify_kkt(inst, solve_myopic(inst)).worst() > 1e-2);
}

TEST_CASE("KKT report on the empty instance") {
  Instance inst = random_instance(2, 2, 3, 1);
  inst.tasks.bits.setZero();
  const KktReport k = verify_kkt(inst, solve(inst));
  CHECK(k.worst() == 0.0);
}

TEST_CASE("monotonicity check") {
  Instance inst = random_instance(1, 2, 4, 1);
  inst.tasks.bits.setZero();
  SolveReport r = solve(inst);
  CHECK(check_monotonicity(r).pass);

  r.allocation.local_bits.row(1) << 1e5, 2e5, 1.5e5, 3e5;
  const MonotonicityResult m = check_monotonicity(r, 1.0);
  CHECK_FALSE(m.pass);
  CHECK(m.user == 1);
  CHECK(m.slot == 2);
  CHECK(m.drop == doctest::Approx(5e4));

  r.allocation.local_bits.setZero();
  r.allocation.server_bits << 0, 3, 2, 5;
  const MonotonicityResult ap = check_monotonicity(r, 0.5);
  CHECK_FALSE(ap.pass);
  CHECK(ap.user == -1);
  CHECK(ap.slot == 2);
}
