#include "groupfs/kernels.hpp"

#include <omp.h>

namespace groupfs::kern {

namespace {
void check_mm(const Mat& A, const Mat& B, int ak, int bk, const char* who) {
  if (ak != bk) throw std::invalid_argument(std::string(who) + ": inner dimension mismatch");
  (void)A;
  (void)B;
}

// OpenMP pays off only past a few thousand madds per call.
constexpr long kParCutoff = 16 * 1024;
}  // namespace

namespace serial {

void matmul(const Mat& A, const Mat& B, Mat& out) {
  check_mm(A, B, A.cols(), B.rows(), "matmul");
  const int m = A.rows(), k = A.cols(), n = B.cols();
  out = Mat(m, n);
  for (int i = 0; i < m; ++i) {
    double* oi = out.row(i);
    const double* ai = A.row(i);
    for (int p = 0; p < k; ++p) {
      const double a = ai[p];
      const double* bp = B.row(p);
      for (int j = 0; j < n; ++j) oi[j] += a * bp[j];
    }
  }
}

void matmul_tn(const Mat& A, const Mat& B, Mat& out) {
  check_mm(A, B, A.rows(), B.rows(), "matmul_tn");
  const int m = A.cols(), k = A.rows(), n = B.cols();
  out = Mat(m, n);
  for (int i = 0; i < m; ++i) {
    double* oi = out.row(i);
    for (int p = 0; p < k; ++p) {
      const double a = A(p, i);
      const double* bp = B.row(p);
      for (int j = 0; j < n; ++j) oi[j] += a * bp[j];
    }
  }
}

void matmul_nt(const Mat& A, const Mat& B, Mat& out) {
  check_mm(A, B, A.cols(), B.cols(), "matmul_nt");
  const int m = A.rows(), k = A.cols(), n = B.rows();
  out = Mat(m, n);
  for (int i = 0; i < m; ++i) {
    double* oi = out.row(i);
    const double* ai = A.row(i);
    for (int j = 0; j < n; ++j) {
      const double* bj = B.row(j);
      double s = 0.0;
      for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
      oi[j] = s;
    }
  }
}

void pairwise_sqdist(const Mat& X, Mat& out) {
  const int n = X.rows(), m = X.cols();
  out = Mat(n, n);
  for (int i = 0; i < n; ++i) {
    const double* xi = X.row(i);
    double* oi = out.row(i);
    for (int j = 0; j < n; ++j) {
      const double* xj = X.row(j);
      double s = 0.0;
      for (int p = 0; p < m; ++p) {
        const double d = xi[p] - xj[p];
        s += d * d;
      }
      oi[j] = s;
    }
  }
}

void pairwise_sqdist_backward(const Mat& X, const Mat& G, Mat& dX) {
  const int n = X.rows(), m = X.cols();
  if (G.rows() != n || G.cols() != n || dX.rows() != n || dX.cols() != m)
    throw std::invalid_argument("pairwise_sqdist_backward: shape mismatch");
  for (int i = 0; i < n; ++i) {
    const double* xi = X.row(i);
    double* di = dX.row(i);
    for (int j = 0; j < n; ++j) {
      const double c = 2.0 * (G(i, j) + G(j, i));
      if (c == 0.0) continue;
      const double* xj = X.row(j);
      for (int p = 0; p < m; ++p) di[p] += c * (xi[p] - xj[p]);
    }
  }
}

double dot(const Mat& A, const Mat& B) {
  if (!A.same_shape(B)) throw std::invalid_argument("dot: shape mismatch");
  // Row partials combined in row order; par:: reproduces this sum exactly.
  double total = 0.0;
  for (int i = 0; i < A.rows(); ++i) {
    const double* ai = A.row(i);
    const double* bi = B.row(i);
    double s = 0.0;
    for (int j = 0; j < A.cols(); ++j) s += ai[j] * bi[j];
    total += s;
  }
  return total;
}

}  // namespace serial

namespace par {

void matmul(const Mat& A, const Mat& B, Mat& out) {
  check_mm(A, B, A.cols(), B.rows(), "matmul");
  const int m = A.rows(), k = A.cols(), n = B.cols();
  out = Mat(m, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double* oi = out.row(i);
    const double* ai = A.row(i);
    for (int p = 0; p < k; ++p) {
      const double a = ai[p];
      const double* bp = B.row(p);
      for (int j = 0; j < n; ++j) oi[j] += a * bp[j];
    }
  }
}

void matmul_tn(const Mat& A, const Mat& B, Mat& out) {
  check_mm(A, B, A.rows(), B.rows(), "matmul_tn");
  const int m = A.cols(), k = A.rows(), n = B.cols();
  out = Mat(m, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double* oi = out.row(i);
    for (int p = 0; p < k; ++p) {
      const double a = A(p, i);
      const double* bp = B.row(p);
      for (int j = 0; j < n; ++j) oi[j] += a * bp[j];
    }
  }
}

void matmul_nt(const Mat& A, const Mat& B, Mat& out) {
  check_mm(A, B, A.cols(), B.cols(), "matmul_nt");
  const int m = A.rows(), k = A.cols(), n = B.rows();
  out = Mat(m, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double* oi = out.row(i);
    const double* ai = A.row(i);
    for (int j = 0; j < n; ++j) {
      const double* bj = B.row(j);
      double s = 0.0;
      for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
      oi[j] = s;
    }
  }
}

void pairwise_sqdist(const Mat& X, Mat& out) {
  const int n = X.rows(), m = X.cols();
  out = Mat(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* xi = X.row(i);
    double* oi = out.row(i);
    for (int j = 0; j < n; ++j) {
      const double* xj = X.row(j);
      double s = 0.0;
      for (int p = 0; p < m; ++p) {
        const double d = xi[p] - xj[p];
        s += d * d;
      }
      oi[j] = s;
    }
  }
}

void pairwise_sqdist_backward(const Mat& X, const Mat& G, Mat& dX) {
  const int n = X.rows(), m = X.cols();
  if (G.rows() != n || G.cols() != n || dX.rows() != n || dX.cols() != m)
    throw std::invalid_argument("pairwise_sqdist_backward: shape mismatch");
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* xi = X.row(i);
    double* di = dX.row(i);
    for (int j = 0; j < n; ++j) {
      const double c = 2.0 * (G(i, j) + G(j, i));
      if (c == 0.0) continue;
      const double* xj = X.row(j);
      for (int p = 0; p < m; ++p) di[p] += c * (xi[p] - xj[p]);
    }
  }
}

double dot(const Mat& A, const Mat& B) {
  if (!A.same_shape(B)) throw std::invalid_argument("dot: shape mismatch");
  const int m = A.rows();
  std::vector<double> partial(m, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double* ai = A.row(i);
    const double* bi = B.row(i);
    double s = 0.0;
    for (int j = 0; j < A.cols(); ++j) s += ai[j] * bi[j];
    partial[i] = s;
  }
  double total = 0.0;
  for (int i = 0; i < m; ++i) total += partial[i];
  return total;
}

}  // namespace par

namespace {
inline bool big(long work) { return work >= kParCutoff && omp_get_max_threads() > 1; }
}

Mat matmul(const Mat& A, const Mat& B) {
  Mat out;
  if (big(static_cast<long>(A.rows()) * A.cols() * B.cols()))
    par::matmul(A, B, out);
  else
    serial::matmul(A, B, out);
  return out;
}

Mat matmul_tn(const Mat& A, const Mat& B) {
  Mat out;
  if (big(static_cast<long>(A.cols()) * A.rows() * B.cols()))
    par::matmul_tn(A, B, out);
  else
    serial::matmul_tn(A, B, out);
  return out;
}

Mat matmul_nt(const Mat& A, const Mat& B) {
  Mat out;
  if (big(static_cast<long>(A.rows()) * A.cols() * B.rows()))
    par::matmul_nt(A, B, out);
  else
    serial::matmul_nt(A, B, out);
  return out;
}

Mat pairwise_sqdist(const Mat& X) {
  Mat out;
  if (big(static_cast<long>(X.rows()) * X.rows() * X.cols()))
    par::pairwise_sqdist(X, out);
  else
    serial::pairwise_sqdist(X, out);
  return out;
}

void pairwise_sqdist_backward(const Mat& X, const Mat& G, Mat& dX) {
  if (big(static_cast<long>(X.rows()) * X.rows() * X.cols()))
    par::pairwise_sqdist_backward(X, G, dX);
  else
    serial::pairwise_sqdist_backward(X, G, dX);
}

double dot(const Mat& A, const Mat& B) {
  if (big(static_cast<long>(A.size()))) return par::dot(A, B);
  return serial::dot(A, B);
}

Mat transpose(const Mat& A) {
  Mat out(A.cols(), A.rows());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) out(j, i) = A(i, j);
  return out;
}

Mat add(const Mat& A, const Mat& B) {
  if (!A.same_shape(B)) throw std::invalid_argument("add: shape mismatch");
  Mat out = A;
  for (size_t k = 0; k < out.size(); ++k) out[k] += B[k];
  return out;
}

Mat sub(const Mat& A, const Mat& B) {
  if (!A.same_shape(B)) throw std::invalid_argument("sub: shape mismatch");
  Mat out = A;
  for (size_t k = 0; k < out.size(); ++k) out[k] -= B[k];
  return out;
}

Mat scale(const Mat& A, double s) {
  Mat out = A;
  for (size_t k = 0; k < out.size(); ++k) out[k] *= s;
  return out;
}

Mat hadamard(const Mat& A, const Mat& B) {
  if (!A.same_shape(B)) throw std::invalid_argument("hadamard: shape mismatch");
  Mat out = A;
  for (size_t k = 0; k < out.size(); ++k) out[k] *= B[k];
  return out;
}

std::vector<double> row_sums(const Mat& A) {
  std::vector<double> s(A.rows(), 0.0);
  for (int i = 0; i < A.rows(); ++i) {
    const double* ai = A.row(i);
    for (int j = 0; j < A.cols(); ++j) s[i] += ai[j];
  }
  return s;
}

std::vector<double> col_sums(const Mat& A) {
  std::vector<double> s(A.cols(), 0.0);
  for (int i = 0; i < A.rows(); ++i) {
    const double* ai = A.row(i);
    for (int j = 0; j < A.cols(); ++j) s[j] += ai[j];
  }
  return s;
}

double frobenius_sq(const Mat& A) { return dot(A, A); }

}  // namespace groupfs::kern
