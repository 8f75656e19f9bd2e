#pragma once

#include <utility>

#include "wpmec/model.hpp"

namespace wpmec {

/// Smallest eigenvalue and a unit eigenvector of a Hermitian matrix.
/// Throws InvalidArgument when H is not square or its asymmetry exceeds
/// 1e-12 relative to max |H_ab|.
std::pair<double, CVector> min_eig_hermitian(const CMatrix& H);

/// True when the Cholesky factorization of the lower triangle of H succeeds
/// with strictly positive pivots. Cheap enough for per-iteration use.
bool hermitian_positive_definite(const CMatrix& H);

/// Largest |H - H^H| entry relative to max(1e-300, max |H|).
double relative_asymmetry(const CMatrix& H);

}  // namespace wpmec
