// Times the serial reference kernels against the OpenMP ones and checks the
// outputs agree bit-for-bit. Run with OMP_NUM_THREADS set to taste.

#include <omp.h>

#include <cstdio>
#include <cstring>

#include "groupfs/kernels.hpp"
#include "groupfs/rng.hpp"

using groupfs::Mat;
using groupfs::Rng;
namespace kern = groupfs::kern;

namespace {

double max_abs_diff(const Mat& a, const Mat& b) {
  double m = 0.0;
  for (size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    f();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

void report(const char* name, double ts, double tp, double diff) {
  std::printf("%-28s serial %9.4f ms   omp %9.4f ms   speedup %5.2fx   max|diff| %g\n", name,
              1e3 * ts, 1e3 * tp, ts / tp, diff);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  Rng rng(7);
  const int reps = 5;

  {
    const int n = 384;
    const Mat A = rng.normal_mat(n, n), B = rng.normal_mat(n, n);
    Mat s, p;
    const double ts = time_best_of(reps, [&] { kern::serial::matmul(A, B, s); });
    const double tp = time_best_of(reps, [&] { kern::par::matmul(A, B, p); });
    report("matmul 384x384", ts, tp, max_abs_diff(s, p));
  }
  {
    const int n = 384;
    const Mat A = rng.normal_mat(n, n), B = rng.normal_mat(n, n);
    Mat s, p;
    const double ts = time_best_of(reps, [&] { kern::serial::matmul_tn(A, B, s); });
    const double tp = time_best_of(reps, [&] { kern::par::matmul_tn(A, B, p); });
    report("matmul_tn 384x384", ts, tp, max_abs_diff(s, p));
  }
  {
    const int n = 768, m = 32;
    const Mat X = rng.normal_mat(n, m);
    Mat s, p;
    const double ts = time_best_of(reps, [&] { kern::serial::pairwise_sqdist(X, s); });
    const double tp = time_best_of(reps, [&] { kern::par::pairwise_sqdist(X, p); });
    report("pairwise_sqdist 768x32", ts, tp, max_abs_diff(s, p));
  }
  {
    const int n = 768, m = 32;
    const Mat X = rng.normal_mat(n, m);
    const Mat G = rng.normal_mat(n, n);
    Mat s(n, m), p(n, m);
    const double ts =
        time_best_of(reps, [&] { std::memset(s.data(), 0, s.size() * sizeof(double));
                                 kern::serial::pairwise_sqdist_backward(X, G, s); });
    const double tp =
        time_best_of(reps, [&] { std::memset(p.data(), 0, p.size() * sizeof(double));
                                 kern::par::pairwise_sqdist_backward(X, G, p); });
    report("sqdist_backward 768x32", ts, tp, max_abs_diff(s, p));
  }
  {
    const int n = 1024;
    const Mat A = rng.normal_mat(n, n), B = rng.normal_mat(n, n);
    double vs = 0.0, vp = 0.0;
    const double ts = time_best_of(reps, [&] { vs = kern::serial::dot(A, B); });
    const double tp = time_best_of(reps, [&] { vp = kern::par::dot(A, B); });
    report("dot 1024x1024", ts, tp, std::abs(vs - vp));
  }
  return 0;
}
