#include "doctest.h"

#include <random>

#include "support.hpp"
#include "wpmec/hermitian.hpp"
#include "wpmec/model.hpp"

using namespace wpmec;
using wpmec::test::flat_instance;

TEST_CASE("well formed single user instance validates") {
  const Instance inst = flat_instance(1, 1, 1);
  CHECK(validate_instance(inst).ok());
}

TEST_CASE("zero uplink gain is named") {
  Instance inst = flat_instance(1, 1, 1);
  inst.channels.uplink_gain(0, 0) = 0.0;
  const auto rep = validate_instance(inst);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].find("uplink gain nonpositive") != std::string::npos);
}

TEST_CASE("short arrival array is a dimension violation") {
  Instance inst = flat_instance(1, 3, 1);
  inst.tasks.bits = RMatrix::Constant(1, 2, 1.0);
  const auto rep = validate_instance(inst);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations[0].find("dimension mismatch") != std::string::npos);
}

TEST_CASE("negative arrival and bad efficiency are both reported") {
  Instance inst = flat_instance(2, 2, 1);
  inst.tasks.bits(1, 0) = -1.0;
  inst.params.harvest_efficiency[0] = 1.5;
  CHECK(validate_instance(inst).violations.size() == 2);
}

TEST_CASE("hbar fixtures") {
  Instance inst = flat_instance(1, 2, 1, 1.0);
  inst.params.harvest_efficiency = {1.0};
  DualPoint d = DualPoint::zeros(inst.params);
  CHECK(std::abs(hbar(inst, d, 0)(0, 0) - 1.0) < 1e-15);

  d.energy(0, 1) = 1.0;  // suffix sum from slot 0 and 1 is 1
  CHECK(std::abs(hbar(inst, d, 0)(0, 0)) < 1e-15);
  CHECK(std::abs(hbar(inst, d, 1)(0, 0)) < 1e-15);

  Instance weak = flat_instance(1, 1, 1, 1e-2);
  DualPoint w = DualPoint::zeros(weak.params);
  w.energy(0, 0) = 1e4;
  CHECK(std::abs(hbar(weak, w, 0)(0, 0).real() - 0.7) < 1e-12);

  CHECK_THROWS_AS(hbar(inst, d, 2), std::out_of_range);
}

TEST_CASE("hbar is Hermitian and decreases as an energy price rises") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  Instance inst = flat_instance(3, 4, 3);
  for (auto& row : inst.channels.downlink)
    for (auto& h : row)
      for (int m = 0; m < 3; ++m) h(m) = Complex(n01(rng), n01(rng)) * 1e-2;
  DualPoint d = DualPoint::zeros(inst.params);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 4; ++i) d.energy(k, i) = u(rng);
  for (int trial = 0; trial < 20; ++trial) {
    const int slot = trial % 4;
    const CMatrix H = hbar(inst, d, slot);
    CHECK(relative_asymmetry(H) == 0.0);
    const double before = min_eig_hermitian(H).first;
    DualPoint up = d;
    up.energy(trial % 3, 3 - slot % 2) += u(rng);
    const double after = min_eig_hermitian(hbar(inst, up, slot)).first;
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("suffix sums") {
  RMatrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const RMatrix s = suffix_sums(m);
  CHECK(s(0, 0) == 6);
  CHECK(s(1, 1) == 11);
  CHECK(s(1, 2) == 6);
  RVector v(3);
  v << 1, 2, 3;
  const RVector sv = suffix_sums(v);
  REQUIRE(sv.size() == 4);
  CHECK(sv(0) == 6);
  CHECK(sv(3) == 0);
}
