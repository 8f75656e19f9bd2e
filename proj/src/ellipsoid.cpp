#include "wpmec/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "wpmec/errors.hpp"

namespace wpmec {

std::string to_string(EllipsoidStop stop) {
  switch (stop) {
    case EllipsoidStop::kConverged: return "converged";
    case EllipsoidStop::kStagnation: return "stagnation";
    case EllipsoidStop::kMaxIterations: return "max_iterations";
    case EllipsoidStop::kEmpty: return "empty";
    case EllipsoidStop::kMonitor: return "monitor";
  }
  return "unknown";
}

Ellipsoid::Ellipsoid(RVector center, const RVector& semi_axes) : center_(std::move(center)) {
  const auto n = center_.size();
  if (n < 1) throw InvalidArgument("ellipsoid: dimension must be >= 1");
  if (semi_axes.size() != n) throw InvalidArgument("ellipsoid: semi-axis count differs from the dimension");
  if (!center_.allFinite()) throw InvalidArgument("ellipsoid: center must be finite");
  lower_ = RMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = semi_axes(i);
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("ellipsoid: semi-axes must be positive and finite");
    lower_(i, i) = r * r;
    log_det_ += 2.0 * std::log(r);
  }
  work_.resize(n);
}

Ellipsoid::Ellipsoid(RVector center, double radius)
    : Ellipsoid(center, RVector::Constant(center.size(), radius)) {}

RMatrix Ellipsoid::shape() const {
  RMatrix p = lower_.selfadjointView<Eigen::Lower>();
  return scale_ * p;
}

double Ellipsoid::width(const RVector& a) const {
  const double q = a.dot(lower_.selfadjointView<Eigen::Lower>() * a);
  return std::sqrt(std::max(0.0, scale_ * q));
}

void Ellipsoid::fold_scale() {
  lower_.triangularView<Eigen::Lower>() *= scale_;
  scale_ = 1.0;
}

void Ellipsoid::repair() {
  ++repairs_;
  fold_scale();
  RMatrix p = lower_.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(p);
  RVector ev = es.eigenvalues();
  const double floor = std::max(1e-300, 1e-300 * ev.cwiseAbs().sum());
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::max(ev(i), floor);
  lower_ = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  log_det_ = ev.array().log().sum();
}

void Ellipsoid::shape_times(const RVector& a) {
  const Eigen::Index n = center_.size();
  // Sign and box cuts touch a single coordinate; reading the needed columns
  // of the stored triangle is much cheaper than a dense product.
  nonzeros_.clear();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (a(j) != 0.0) {
      nonzeros_.push_back(j);
      if (static_cast<Eigen::Index>(nonzeros_.size()) * 8 > n) break;
    }
  }
  if (static_cast<Eigen::Index>(nonzeros_.size()) * 8 > n) {
    work_.noalias() = lower_.selfadjointView<Eigen::Lower>() * a;
    return;
  }
  work_.setZero();
  for (const Eigen::Index j : nonzeros_) {
    const double aj = a(j);
    work_.head(j) += aj * lower_.row(j).head(j).transpose();
    work_.tail(n - j) += aj * lower_.col(j).tail(n - j);
  }
}

bool Ellipsoid::cut(const RVector& a, double depth) {
  const auto n = center_.size();
  if (a.size() != n) throw InvalidArgument("ellipsoid cut: direction has the wrong length");
  shape_times(a);
  double q = scale_ * a.dot(work_);
  if (!(q > 0.0) || !std::isfinite(q)) {
    repair();
    shape_times(a);
    q = a.dot(work_);
    if (!(q > 0.0)) throw NumericalError("ellipsoid cut: shape matrix lost definiteness");
  }
  const double w = std::sqrt(q);
  double alpha = std::max(0.0, depth / w);
  if (alpha >= 1.0) return false;

  // b = P a / sqrt(a^T P a)
  work_ *= scale_ / w;
  if (n == 1) {
    // Interval [c - r, c + r] intersected with the kept half-line.
    const double r = w / std::abs(a(0));
    const double sgn = a(0) > 0.0 ? 1.0 : -1.0;
    const double new_r = 0.5 * (1.0 - alpha) * r;
    center_(0) += sgn * 0.5 * (1.0 + alpha) * r;
    lower_(0, 0) = new_r * new_r;
    scale_ = 1.0;
    log_det_ = 2.0 * std::log(new_r);
    return true;
  }

  const double dn = static_cast<double>(n);
  const double tau = (1.0 + dn * alpha) / (dn + 1.0);
  const double sigma = 2.0 * (1.0 + dn * alpha) / ((dn + 1.0) * (1.0 + alpha));
  const double delta = dn * dn * (1.0 - alpha * alpha) / (dn * dn - 1.0);

  center_.noalias() += tau * work_;
  // P <- delta (P - sigma b b^T), stored as scale * lower.
  lower_.selfadjointView<Eigen::Lower>().rankUpdate(work_, -sigma / scale_);
  scale_ *= delta;
  log_det_ += dn * std::log(delta) + std::log1p(-sigma);
  if (scale_ > 1e100 || scale_ < 1e-100) fold_scale();
  return true;
}

EllipsoidResult maximize(const EllipsoidOracle& oracle, const RVector& x0, const RVector& semi_axes,
                         const EllipsoidOptions& opts) {
  if (!x0.allFinite()) throw InvalidArgument("maximize: x0 must be finite");
  Ellipsoid ell(x0, semi_axes);
  const long n = ell.dimension();
  const long window = std::max<long>(1, opts.stagnation_factor * n);

  EllipsoidResult res;
  res.upper_bound = std::numeric_limits<double>::infinity();
  double stagnation_ref = -std::numeric_limits<double>::infinity();
  long objective_since = 0;

  for (long it = 0; it < opts.max_iter; ++it) {
    res.iterations = it + 1;
    const RVector& x = ell.center();
    EllipsoidCut c = oracle(x);
    if (c.direction.size() != n) throw InvalidArgument("maximize: oracle returned a cut of the wrong length");
    bool kept;
    char kind;
    if (c.kind == EllipsoidCut::Kind::kObjective) {
      ++res.objective_cuts;
      kind = 'o';
      if (!res.found_feasible || c.value > res.best_value) {
        res.found_feasible = true;
        res.best_value = c.value;
        res.best_point = x;
      }
      const double w = ell.width(c.direction);
      res.upper_bound = std::min(res.upper_bound, c.value + w);
      const double gap = res.upper_bound - res.best_value;
      const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(res.best_value));
      if (w <= tol || gap <= tol) {
        res.stop = EllipsoidStop::kConverged;
        break;
      }
      const double depth = opts.deep_cuts ? std::max(0.0, res.best_value - c.value) : 0.0;
      kept = ell.cut(c.direction, depth);
    } else {
      ++res.feasibility_cuts;
      kind = 'f';
      kept = ell.cut(c.direction, opts.deep_cuts ? c.depth : 0.0);
    }
    if (!kept) {
      res.stop = EllipsoidStop::kEmpty;
      break;
    }

    // Stagnation is measured in objective cuts: long runs of feasibility
    // cuts are normal near the boundary of the dual domain.
    if (res.found_feasible && kind == 'o') {
      ++objective_since;
      const double ref = std::max(std::abs(res.best_value), 1e-300);
      if (!std::isfinite(stagnation_ref) || res.best_value - stagnation_ref > opts.stagnation_rel * ref) {
        stagnation_ref = res.best_value;
        objective_since = 0;
      } else if (objective_since >= window) {
        res.stop = EllipsoidStop::kStagnation;
        break;
      }
    }
    if (opts.trace_stride > 0 && it % opts.trace_stride == 0) {
      res.trace.push_back({it, res.found_feasible ? res.best_value : std::nan(""), kind});
    }
    if (opts.monitor && opts.monitor_stride > 0 && (it + 1) % opts.monitor_stride == 0) {
      EllipsoidProgress p{it + 1, res.found_feasible, res.best_value, res.upper_bound,
                          res.found_feasible ? &res.best_point : nullptr};
      if (!opts.monitor(p)) {
        res.stop = EllipsoidStop::kMonitor;
        break;
      }
    }
  }
  res.repairs = ell.repairs();
  return res;
}

EllipsoidResult maximize(const EllipsoidOracle& oracle, const RVector& x0, double r0, const EllipsoidOptions& opts) {
  if (!(r0 > 0.0)) throw InvalidArgument("maximize: r0 must be positive");
  return maximize(oracle, x0, RVector::Constant(x0.size(), r0), opts);
}

void write_trace_csv(const std::vector<EllipsoidTraceRow>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "iteration,best_value,cut_kind\n";
  char buf[64];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%.17g", r.best_value);
    out << r.iteration << ',' << buf << ',' << r.cut_kind << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace wpmec
