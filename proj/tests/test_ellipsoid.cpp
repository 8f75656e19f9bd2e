#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"
#include "wpmec/dual.hpp"
#include "wpmec/ellipsoid.hpp"
#include "wpmec/solver.hpp"

using namespace wpmec;

TEST_CASE("negative squared norm peaks at the origin") {
  EllipsoidOracle oracle = [](const RVector& x) {
    EllipsoidCut c;
    c.value = -x.squaredNorm();
    c.direction = -2.0 * x;
    return c;
  };
  EllipsoidOptions opts;
  opts.abs_tol = 1e-14;
  RVector x0(2);
  x0 << 1, 1;
  const EllipsoidResult r = maximize(oracle, x0, 10.0, opts);
  REQUIRE(r.found_feasible);
  CHECK(r.best_point.norm() < 1e-6);
  CHECK(r.upper_bound >= r.best_value);
}

TEST_CASE("linear objective against a feasibility cut") {
  EllipsoidOracle oracle = [](const RVector& x) {
    EllipsoidCut c;
    if (x(0) > 3.0) {
      c.kind = EllipsoidCut::Kind::kFeasibility;
      c.direction = RVector::Zero(2);
      c.direction(0) = -1.0;
      c.depth = x(0) - 3.0;
      return c;
    }
    c.value = x(0);
    c.direction = RVector::Zero(2);
    c.direction(0) = 1.0;
    return c;
  };
  for (bool deep : {false, true}) {
    EllipsoidOptions opts;
    opts.abs_tol = 1e-7;
    opts.deep_cuts = deep;
    const EllipsoidResult r = maximize(oracle, RVector::Zero(2), 10.0, opts);
    REQUIRE(r.found_feasible);
    CHECK(std::abs(r.best_value - 3.0) < 1e-6);
    CHECK(r.feasibility_cuts > 0);
  }
}

TEST_CASE("central cuts shrink the volume by the guaranteed factor") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (int n : {1, 2, 5, 12}) {
    Ellipsoid e(RVector::Zero(n), 3.0);
    for (int t = 0; t < 200; ++t) {
      RVector a(n);
      for (int j = 0; j < n; ++j) a(j) = n01(rng);
      const double before = e.log_det();
      REQUIRE(e.cut(a));
      CHECK(before - e.log_det() >= 1.0 / (n + 1) - 1e-9);
    }
  }
}

TEST_CASE("deep cut past the ellipsoid empties it") {
  Ellipsoid e(RVector::Zero(3), 1.0);
  RVector a = RVector::Zero(3);
  a(1) = 1.0;
  CHECK(std::abs(e.width(a) - 1.0) < 1e-12);
  CHECK_FALSE(e.cut(a, 1.5));
}

TEST_CASE("trace csv") {
  std::vector<EllipsoidTraceRow> rows{{1, -2.5, 'o'}, {2, -1.0, 'f'}};
  const std::string path = "ellipsoid_trace_test.csv";
  write_trace_csv(rows, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().rfind("iteration,best_value,cut_kind\n", 0) == 0);
  CHECK(ss.str().find("2,-1,f") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("best dual point is dual feasible") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Instance inst = wpmec::test::random_instance(2, 2, 3, seed);
    const SolveReport rep = solve(inst);
    REQUIRE(rep.has_dual);
    CHECK(check_dual_feasible(inst, rep.dual).feasible);
    CHECK(std::isfinite(dual_value(inst, rep.dual)));
  }
}
