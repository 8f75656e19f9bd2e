#pragma once

// Separable convex allocation under nested prefix caps:
//
//   min sum_j f_j(x_j)  s.t.  sum_{j<=i} x_j <= cap_i (i < n-1),
//                             sum_j x_j = cap_{n-1},  x >= 0,
//
// described through the supply x_j(w) = argmin_x f_j(x) - w x, which is
// nondecreasing in the price w. The optimum uses a common price on
// consecutive blocks; each block ends at the prefix that saturates first.

#include <functional>
#include <limits>

#include "wpmec/model.hpp"

namespace wpmec::detail {

struct NestedSupply {
  /// x_j(w) for slot j.
  std::function<double(int, double)> supply;
  /// Largest price at which slot j supplies nothing (+inf if it never does).
  std::function<double(int)> zero_below;
};

/// Slot j takes x_j = (1 - theta_j) x_j(lo_j) + theta_j x_j(hi_j); callers
/// that split x_j into parts interpolate the parts the same way.
struct NestedPrices {
  RVector lo, hi, theta;
};

/// caps are cumulative and nondecreasing. Returns false when the deadline
/// cannot be met (every remaining slot has bounded, insufficient supply).
bool solve_nested(const RVector& caps, const NestedSupply& s, RVector& x, NestedPrices* prices = nullptr);

}  // namespace wpmec::detail
