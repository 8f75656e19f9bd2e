#pragma once

// Lawson-Hanson nonnegative least squares for small dense systems.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace wpmec::detail {

inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A_in, const Eigen::VectorXd& b, int max_iter = 0) {
  const Eigen::Index n = A_in.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (n == 0 || A_in.rows() == 0) return x;

  // Unit columns make the dual tolerance meaningful.
  Eigen::VectorXd colscale(n);
  Eigen::MatrixXd A = A_in;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double c = A.col(j).norm();
    colscale(j) = c > 0.0 ? c : 1.0;
    A.col(j) /= colscale(j);
  }
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 10);
  const double tol = 1e-13 * std::max(1.0, b.norm());

  std::vector<bool> passive(n, false);
  Eigen::VectorXd w = A.transpose() * b;
  for (int outer = 0; outer < max_iter; ++outer) {
    Eigen::Index jmax = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[j] && w(j) > wmax) {
        wmax = w(j);
        jmax = j;
      }
    }
    if (jmax < 0) break;
    passive[jmax] = true;

    for (int inner = 0; inner <= n; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < n; ++j) if (passive[j]) idx.push_back(j);
      Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(c) = A.col(idx[c]);
      const Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
      bool all_pos = true;
      for (Eigen::Index c = 0; c < zp.size(); ++c) all_pos = all_pos && zp(c) > 0.0;
      if (all_pos) {
        x.setZero();
        for (std::size_t c = 0; c < idx.size(); ++c) x(idx[c]) = zp(c);
        break;
      }
      double alpha = 1.0;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        if (zp(c) <= 0.0) {
          const double xi = x(idx[c]);
          alpha = std::min(alpha, xi / (xi - zp(c)));
        }
      }
      for (std::size_t c = 0; c < idx.size(); ++c) {
        x(idx[c]) += alpha * (zp(c) - x(idx[c]));
        if (x(idx[c]) <= 1e-15 * std::max(1.0, std::abs(zp(c)))) {
          x(idx[c]) = 0.0;
          passive[idx[c]] = false;
        }
      }
    }
    w = A.transpose() * (b - A * x);
  }
  return x.cwiseQuotient(colscale);
}

}  // namespace wpmec::detail
