#pragma once

#include <vector>

#include "groupfs/mat.hpp"

namespace groupfs::linalg {

/// Full symmetric eigendecomposition, eigenvalues ascending, eigenvectors in
/// the columns of `vectors`. Throws NumericalError if LAPACK fails to
/// converge (with the dsyevd info code for diagnosis).
void eigh(const Mat& A, Mat& vectors, std::vector<double>& values);

/// Full SVD A = U diag(S) V^T. Throws NumericalError on non-convergence.
void svd(const Mat& A, Mat& U, std::vector<double>& S, Mat& Vt);

/// Orthonormal basis from a square matrix via QR (modified Gram-Schmidt with
/// one re-orthogonalization pass). Input must be square and nonsingular in
/// the generic sense (random Gaussian draws are).
Mat orthonormalize(const Mat& A);

}  // namespace groupfs::linalg
