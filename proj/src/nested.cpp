#include "nested.hpp"

#include <algorithm>
#include <cmath>

namespace wpmec::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Bracket {
  double lo = 0.0;  // block supply at lo is <= need
  double hi = kInf;
  double sum_lo = 0.0;
  double sum_hi = 0.0;
  double price() const { return std::isfinite(hi) ? 0.5 * (lo + hi) : kInf; }
};

double block_supply(const NestedSupply& s, int first, int last, double w) {
  double t = 0.0;
  for (int j = first; j <= last; ++j) t += s.supply(j, w);
  return t;
}

// Largest price at which slots first..last together supply at most `need`.
Bracket price_for(const NestedSupply& s, int first, int last, double need) {
  Bracket b;
  double floor_price = kInf;
  for (int j = first; j <= last; ++j) floor_price = std::min(floor_price, s.zero_below(j));
  if (!std::isfinite(floor_price)) return b;  // the block never supplies anything
  b.lo = floor_price;
  if (need <= 0.0) {
    b.hi = floor_price;
    return b;
  }
  double step = std::max(std::abs(floor_price) * 1e-3, 1e-300);
  double hi = floor_price + step;
  double sum_hi = block_supply(s, first, last, hi);
  while (sum_hi < need) {
    b.lo = hi;
    b.sum_lo = sum_hi;
    step *= 4.0;
    if (step > 1e300) return Bracket{b.lo, kInf, b.sum_lo, 0.0};
    hi = floor_price + step;
    sum_hi = block_supply(s, first, last, hi);
  }
  b.hi = hi;
  b.sum_hi = sum_hi;
  for (int it = 0; it < 200 && b.hi - b.lo > 1e-15 * std::max(std::abs(b.lo), std::abs(b.hi)); ++it) {
    const double mid = 0.5 * (b.lo + b.hi);
    if (mid <= b.lo || mid >= b.hi) break;
    const double v = block_supply(s, first, last, mid);
    if (v <= need) {
      b.lo = mid;
      b.sum_lo = v;
    } else {
      b.hi = mid;
      b.sum_hi = v;
    }
  }
  return b;
}

}  // namespace

bool solve_nested(const RVector& caps, const NestedSupply& s, RVector& x, NestedPrices* prices) {
  const int n = static_cast<int>(caps.size());
  x = RVector::Zero(n);
  if (prices) {
    prices->lo = RVector::Zero(n);
    prices->hi = RVector::Zero(n);
    prices->theta = RVector::Zero(n);
  }
  int start = 0;
  double base = 0.0;
  while (start < n) {
    int best_e = -1;
    Bracket best;
    double best_w = kInf;
    for (int e = start; e < n; ++e) {
      const Bracket b = price_for(s, start, e, std::max(0.0, caps(e) - base));
      const double w = b.price();
      if (best_e < 0 || w <= best_w) {
        best_w = w;
        best_e = e;
        best = b;
      }
    }
    if (!std::isfinite(best_w)) {
      // No prefix saturates: the deadline itself cannot be met.
      return false;
    }
    const double need = std::max(0.0, caps(best_e) - base);
    const double theta = need > 0.0 && best.sum_hi > best.sum_lo
                             ? std::clamp((need - best.sum_lo) / (best.sum_hi - best.sum_lo), 0.0, 1.0)
                             : 0.0;
    for (int j = start; j <= best_e; ++j) {
      if (need > 0.0) {
        const double a = s.supply(j, best.lo);
        const double c = s.supply(j, best.hi);
        x(j) = a + theta * (c - a);
      }
      if (prices) {
        prices->lo(j) = best.lo;
        prices->hi(j) = best.hi;
        prices->theta(j) = theta;
      }
    }
    base = std::max(base, caps(best_e));
    start = best_e + 1;
  }
  return true;
}

}  // namespace wpmec::detail
