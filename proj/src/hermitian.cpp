#include "wpmec/hermitian.hpp"

#include <algorithm>
#include <vector>

#include "wpmec/errors.hpp"

namespace wpmec {

double relative_asymmetry(const CMatrix& H) {
  if (H.size() == 0) return 0.0;
  const double scale = std::max(1e-300, H.cwiseAbs().maxCoeff());
  return (H - H.adjoint()).cwiseAbs().maxCoeff() / scale;
}

std::pair<double, CVector> min_eig_hermitian(const CMatrix& H) {
  if (H.rows() != H.cols() || H.rows() == 0) throw InvalidArgument("min_eig_hermitian: matrix must be square");
  if (relative_asymmetry(H) > 1e-12) throw InvalidArgument("min_eig_hermitian: matrix is not Hermitian");
  if (H.rows() == 1) return {H(0, 0).real(), CVector::Ones(1)};
  // Symmetrize so the solver sees exactly Hermitian input.
  const CMatrix S = 0.5 * (H + H.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("min_eig_hermitian: eigensolver did not converge");
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

bool hermitian_positive_definite(const CMatrix& H) {
  const Eigen::Index m = H.rows();
  constexpr Eigen::Index kStack = 8;
  Complex stack[kStack * kStack];
  std::vector<Complex> heap;
  Complex* a = stack;
  if (m > kStack) {
    heap.resize(static_cast<std::size_t>(m * m));
    a = heap.data();
  }
  // Column-major lower triangle, overwritten by the factor.
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index r = c; r < m; ++r) a[c * m + r] = H(r, c);
  for (Eigen::Index j = 0; j < m; ++j) {
    double d = a[j * m + j].real();
    for (Eigen::Index p = 0; p < j; ++p) d -= std::norm(a[p * m + j]);
    if (!(d > 0.0)) return false;
    const double root = std::sqrt(d);
    a[j * m + j] = root;
    for (Eigen::Index r = j + 1; r < m; ++r) {
      Complex v = a[j * m + r];
      for (Eigen::Index p = 0; p < j; ++p) v -= a[p * m + r] * std::conj(a[p * m + j]);
      a[j * m + r] = v / root;
    }
  }
  return true;
}

}  // namespace wpmec
