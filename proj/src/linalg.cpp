#include "groupfs/linalg.hpp"

#include <lapacke.h>

#include <cmath>
#include <string>

namespace groupfs::linalg {

void eigh(const Mat& A, Mat& vectors, std::vector<double>& values) {
  if (A.rows() != A.cols()) throw std::invalid_argument("eigh: matrix not square");
  const int n = A.rows();
  vectors = A;
  values.assign(n, 0.0);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'U', n,
                                         vectors.data(), n, values.data());
  if (info != 0)
    throw NumericalError("eigh: dsyevd failed to converge, info=" + std::to_string(info) +
                         " (n=" + std::to_string(n) + ")");
}

void svd(const Mat& A, Mat& U, std::vector<double>& S, Mat& Vt) {
  const int m = A.rows(), n = A.cols();
  Mat work = A;
  U = Mat(m, m);
  Vt = Mat(n, n);
  S.assign(std::min(m, n), 0.0);
  std::vector<double> superb(std::max(1, std::min(m, n) - 1));
  const lapack_int info =
      LAPACKE_dgesvd(LAPACK_ROW_MAJOR, 'A', 'A', m, n, work.data(), n, S.data(),
                     U.data(), m, Vt.data(), n, superb.data());
  if (info != 0)
    throw NumericalError("svd: dgesvd failed to converge, info=" + std::to_string(info));
}

Mat orthonormalize(const Mat& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("orthonormalize: matrix not square");
  const int n = A.rows();
  Mat Q = A;
  // Column-wise modified Gram-Schmidt, two passes.
  for (int j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < j; ++k) {
        double proj = 0.0;
        for (int i = 0; i < n; ++i) proj += Q(i, k) * Q(i, j);
        for (int i = 0; i < n; ++i) Q(i, j) -= proj * Q(i, k);
      }
    }
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += Q(i, j) * Q(i, j);
    norm = std::sqrt(norm);
    if (norm < 1e-12)
      throw NumericalError("orthonormalize: rank-deficient input");
    for (int i = 0; i < n; ++i) Q(i, j) /= norm;
  }
  return Q;
}

}  // namespace groupfs::linalg
