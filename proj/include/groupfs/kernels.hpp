#pragma once

#include "groupfs/mat.hpp"

// Dense compute kernels. Every hot kernel exists twice: kern::serial is the
// reference implementation, kern::par the OpenMP one. The parallel versions
// partition work by output row and keep each row's inner loop in the exact
// order the serial code uses, so the two are bit-identical for any thread
// count. The unqualified wrappers dispatch on problem size.
//
// tools/bench_kernels.cpp times the two flavors against each other.

namespace groupfs::kern {

namespace serial {
void matmul(const Mat& A, const Mat& B, Mat& out);     // out = A B
void matmul_tn(const Mat& A, const Mat& B, Mat& out);  // out = A^T B
void matmul_nt(const Mat& A, const Mat& B, Mat& out);  // out = A B^T
void pairwise_sqdist(const Mat& X, Mat& out);          // out_ij = ||x_i - x_j||^2
// dX accumulation for S = pairwise_sqdist(X):
//   dX_i += sum_j 2 (G_ij + G_ji) (x_i - x_j)
void pairwise_sqdist_backward(const Mat& X, const Mat& G, Mat& dX);
double dot(const Mat& A, const Mat& B);                // sum(A .* B)
}  // namespace serial

namespace par {
void matmul(const Mat& A, const Mat& B, Mat& out);
void matmul_tn(const Mat& A, const Mat& B, Mat& out);
void matmul_nt(const Mat& A, const Mat& B, Mat& out);
void pairwise_sqdist(const Mat& X, Mat& out);
void pairwise_sqdist_backward(const Mat& X, const Mat& G, Mat& dX);
double dot(const Mat& A, const Mat& B);
}  // namespace par

Mat matmul(const Mat& A, const Mat& B);
Mat matmul_tn(const Mat& A, const Mat& B);
Mat matmul_nt(const Mat& A, const Mat& B);
Mat pairwise_sqdist(const Mat& X);
void pairwise_sqdist_backward(const Mat& X, const Mat& G, Mat& dX);
double dot(const Mat& A, const Mat& B);

// Small helpers, serial only.
Mat transpose(const Mat& A);
Mat add(const Mat& A, const Mat& B);
Mat sub(const Mat& A, const Mat& B);
Mat scale(const Mat& A, double s);
Mat hadamard(const Mat& A, const Mat& B);
std::vector<double> row_sums(const Mat& A);
std::vector<double> col_sums(const Mat& A);
double frobenius_sq(const Mat& A);

}  // namespace groupfs::kern
