#include <doctest.h>

#include <array>

#include "groupfs/kernels.hpp"
#include "groupfs/rng.hpp"

using groupfs::Mat;
using groupfs::Rng;
namespace kern = groupfs::kern;

namespace {

// Naive reference multiply, independent of the kernel loop structure.
Mat naive_mm(const Mat& A, const Mat& B) {
  Mat out(A.rows(), B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j) {
      double s = 0.0;
      for (int p = 0; p < A.cols(); ++p) s += A(i, p) * B(p, j);
      out(i, j) = s;
    }
  return out;
}

bool bit_equal(const Mat& a, const Mat& b) {
  if (!a.same_shape(b)) return false;
  for (size_t k = 0; k < a.size(); ++k)
    if (a[k] != b[k]) return false;
  return true;
}

}  // namespace

TEST_CASE("matmul matches a hand example") {
  const Mat A = Mat::from_rows({{1, 2}, {3, 4}});
  const Mat B = Mat::from_rows({{5, 6}, {7, 8}});
  const Mat C = kern::matmul(A, B);
  CHECK(C(0, 0) == 19);
  CHECK(C(0, 1) == 22);
  CHECK(C(1, 0) == 43);
  CHECK(C(1, 1) == 50);
  CHECK_THROWS_AS(kern::matmul(A, Mat(3, 2)), std::invalid_argument);
}

TEST_CASE("serial and parallel kernels are bit-identical") {
  Rng rng(11);
  const std::vector<std::array<int, 3>> shapes = {{3, 5, 7}, {64, 33, 17}, {129, 64, 65}};
  for (const auto [m, k, n] : shapes) {
    const Mat A = rng.normal_mat(m, k);
    const Mat B = rng.normal_mat(k, n);
    Mat s, p;
    kern::serial::matmul(A, B, s);
    kern::par::matmul(A, B, p);
    CHECK(bit_equal(s, p));

    const Mat At = rng.normal_mat(k, m);
    kern::serial::matmul_tn(At, B, s);
    kern::par::matmul_tn(At, B, p);
    CHECK(bit_equal(s, p));

    const Mat Bt = rng.normal_mat(n, k);
    kern::serial::matmul_nt(A, Bt, s);
    kern::par::matmul_nt(A, Bt, p);
    CHECK(bit_equal(s, p));
  }
  for (const int n : {5, 80}) {
    const Mat X = rng.normal_mat(n, 9);
    Mat s, p;
    kern::serial::pairwise_sqdist(X, s);
    kern::par::pairwise_sqdist(X, p);
    CHECK(bit_equal(s, p));

    const Mat G = rng.normal_mat(n, n);
    Mat ds(n, 9), dp(n, 9);
    kern::serial::pairwise_sqdist_backward(X, G, ds);
    kern::par::pairwise_sqdist_backward(X, G, dp);
    CHECK(bit_equal(ds, dp));
  }
  const Mat A = rng.normal_mat(200, 91);
  const Mat B = rng.normal_mat(200, 91);
  CHECK(kern::serial::dot(A, B) == kern::par::dot(A, B));
}

TEST_CASE("matmul variants agree with the naive reference") {
  Rng rng(3);
  const Mat A = rng.normal_mat(6, 4), B = rng.normal_mat(4, 5);
  const Mat ref = naive_mm(A, B);
  const Mat got = kern::matmul(A, B);
  for (size_t k = 0; k < ref.size(); ++k) CHECK(got[k] == doctest::Approx(ref[k]).epsilon(1e-14));

  const Mat tn = kern::matmul_tn(kern::transpose(A), B);
  for (size_t k = 0; k < ref.size(); ++k) CHECK(tn[k] == doctest::Approx(ref[k]).epsilon(1e-14));

  const Mat nt = kern::matmul_nt(A, kern::transpose(B));
  for (size_t k = 0; k < ref.size(); ++k) CHECK(nt[k] == doctest::Approx(ref[k]).epsilon(1e-14));
}

TEST_CASE("pairwise_sqdist matches brute force and is symmetric with zero diagonal") {
  Rng rng(5);
  const Mat X = rng.normal_mat(12, 3);
  const Mat S = kern::pairwise_sqdist(X);
  for (int i = 0; i < 12; ++i) {
    CHECK(S(i, i) == 0.0);
    for (int j = 0; j < 12; ++j) {
      double s = 0.0;
      for (int p = 0; p < 3; ++p) s += (X(i, p) - X(j, p)) * (X(i, p) - X(j, p));
      CHECK(S(i, j) == doctest::Approx(s).epsilon(1e-14));
      CHECK(S(i, j) == S(j, i));
    }
  }
}
