#pragma once

// Ellipsoid method for maximizing a concave function over a convex set that
// is described only through separating hyperplanes.

#include <functional>
#include <string>
#include <vector>

#include "wpmec/model.hpp"

namespace wpmec {

/// Answer of the oracle at a query point x.
///  - objective cut: x is feasible, `value` = f(x) and `direction` is a
///    supergradient; everything better than the incumbent lies in
///    { y : direction . (y - x) >= 0 }.
///  - feasibility cut: x is infeasible and the feasible set lies in
///    { y : direction . (y - x) >= depth }, depth >= 0 for a valid deep cut.
struct EllipsoidCut {
  enum class Kind { kObjective, kFeasibility };
  Kind kind = Kind::kObjective;
  RVector direction;
  double value = 0.0;
  double depth = 0.0;
};

using EllipsoidOracle = std::function<EllipsoidCut(const RVector&)>;

enum class EllipsoidStop {
  kConverged,     // certified gap below tolerance
  kStagnation,    // best value flat for the stagnation window
  kMaxIterations,
  kEmpty,         // a cut removed the whole ellipsoid
  kMonitor,       // the monitor callback asked to stop
};

std::string to_string(EllipsoidStop stop);

struct EllipsoidProgress {
  long iteration = 0;
  bool has_best = false;
  double best_value = 0.0;
  double upper_bound = 0.0;  // valid while the optimum stays inside the ellipsoid
  const RVector* best_point = nullptr;
};

struct EllipsoidOptions {
  double abs_tol = 1e-6;
  double rel_tol = 0.0;
  long max_iter = 1'000'000;
  double stagnation_rel = 1e-9;
  long stagnation_factor = 50;  // window = factor * n iterations
  bool deep_cuts = false;
  long trace_stride = 0;  // 0 disables the trace
  long monitor_stride = 0;
  /// Return false to stop.
  std::function<bool(const EllipsoidProgress&)> monitor;
};

struct EllipsoidTraceRow {
  long iteration = 0;
  double best_value = 0.0;
  char cut_kind = 'o';  // 'o' objective, 'f' feasibility
};

struct EllipsoidResult {
  bool found_feasible = false;
  RVector best_point;
  double best_value = 0.0;
  double upper_bound = 0.0;
  long iterations = 0;
  long objective_cuts = 0;
  long feasibility_cuts = 0;
  int repairs = 0;  // SPD repairs of the shape matrix
  EllipsoidStop stop = EllipsoidStop::kMaxIterations;
  std::vector<EllipsoidTraceRow> trace;
};

/// Ellipsoid { y : (y - c)^T P^{-1} (y - c) <= 1 }. The shape matrix is kept
/// as scale * lower triangle of a symmetric matrix.
class Ellipsoid {
 public:
  Ellipsoid(RVector center, const RVector& semi_axes);
  Ellipsoid(RVector center, double radius);

  int dimension() const { return static_cast<int>(center_.size()); }
  const RVector& center() const { return center_; }
  RMatrix shape() const;
  double log_det() const { return log_det_; }

  /// sqrt(a^T P a).
  double width(const RVector& a) const;

  /// Keep { y : a . (y - c) >= depth }. Returns false when that set misses the
  /// ellipsoid (depth >= width). Negative depth is treated as a central cut.
  bool cut(const RVector& a, double depth = 0.0);

  int repairs() const { return repairs_; }

 private:
  void repair();
  void fold_scale();
  void shape_times(const RVector& a);  // work_ = lower-stored P times a

  RVector center_;
  RMatrix lower_;  // only the lower triangle is meaningful
  double scale_ = 1.0;
  double log_det_ = 0.0;
  RVector work_;
  std::vector<Eigen::Index> nonzeros_;
  int repairs_ = 0;
};

EllipsoidResult maximize(const EllipsoidOracle& oracle, const RVector& x0, const RVector& semi_axes,
                         const EllipsoidOptions& opts = {});
EllipsoidResult maximize(const EllipsoidOracle& oracle, const RVector& x0, double r0,
                         const EllipsoidOptions& opts = {});

/// Writes iteration,best_value,cut_kind rows.
void write_trace_csv(const std::vector<EllipsoidTraceRow>& trace, const std::string& path);

}  // namespace wpmec
