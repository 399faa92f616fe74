#include "groupfs/autodiff.hpp"

#include <cmath>

#include "groupfs/kernels.hpp"

namespace groupfs::ad {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Mat& Tape::grad_of(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Mat(n.val.rows(), n.val.cols());
  return n.grad;
}

Var Tape::leaf(Mat value, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.val = std::move(value);
  n.rg = requires_grad;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  Node n;
  n.op = Op::Add;
  n.a = a.id;
  n.b = b.id;
  n.val = kern::add(nodes_[a.id].val, nodes_[b.id].val);
  n.rg = rg(a.id) || rg(b.id);
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  Node n;
  n.op = Op::Sub;
  n.a = a.id;
  n.b = b.id;
  n.val = kern::sub(nodes_[a.id].val, nodes_[b.id].val);
  n.rg = rg(a.id) || rg(b.id);
  return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
  Node n;
  n.op = Op::Scale;
  n.a = a.id;
  n.sc = s;
  n.val = kern::scale(nodes_[a.id].val, s);
  n.rg = rg(a.id);
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  Node n;
  n.op = Op::Mul;
  n.a = a.id;
  n.b = b.id;
  n.val = kern::hadamard(nodes_[a.id].val, nodes_[b.id].val);
  n.rg = rg(a.id) || rg(b.id);
  return push(std::move(n));
}

Var Tape::colscale(Var a, Var v) {
  const Mat& A = nodes_[a.id].val;
  const Mat& V = nodes_[v.id].val;
  require(V.rows() == 1 && V.cols() == A.cols(), "colscale: scale vector shape mismatch");
  Node n;
  n.op = Op::ColScale;
  n.a = a.id;
  n.b = v.id;
  n.val = A;
  for (int i = 0; i < A.rows(); ++i) {
    double* ri = n.val.row(i);
    for (int j = 0; j < A.cols(); ++j) ri[j] *= V(0, j);
  }
  n.rg = rg(a.id) || rg(v.id);
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::MatMul;
  n.a = a.id;
  n.b = b.id;
  n.val = kern::matmul(nodes_[a.id].val, nodes_[b.id].val);
  n.rg = rg(a.id) || rg(b.id);
  return push(std::move(n));
}

Var Tape::transpose(Var a) {
  Node n;
  n.op = Op::Transpose;
  n.a = a.id;
  n.val = kern::transpose(nodes_[a.id].val);
  n.rg = rg(a.id);
  return push(std::move(n));
}

Var Tape::softmax_rows(Var a) {
  const Mat& A = nodes_[a.id].val;
  Node n;
  n.op = Op::SoftmaxRows;
  n.a = a.id;
  n.val = Mat(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < A.cols(); ++j) mx = std::max(mx, A(i, j));
    double sum = 0.0;
    for (int j = 0; j < A.cols(); ++j) {
      n.val(i, j) = std::exp(A(i, j) - mx);
      sum += n.val(i, j);
    }
    for (int j = 0; j < A.cols(); ++j) n.val(i, j) /= sum;
  }
  n.rg = rg(a.id);
  return push(std::move(n));
}

Var Tape::exp_elem(Var a) {
  Node n;
  n.op = Op::Exp;
  n.a = a.id;
  n.val = nodes_[a.id].val;
  for (size_t k = 0; k < n.val.size(); ++k) n.val[k] = std::exp(n.val[k]);
  n.rg = rg(a.id);
  return push(std::move(n));
}

Var Tape::clamp01(Var a) {
  Node n;
  n.op = Op::Clamp01;
  n.a = a.id;
  n.val = nodes_[a.id].val;
  for (size_t k = 0; k < n.val.size(); ++k) n.val[k] = std::clamp(n.val[k], 0.0, 1.0);
  n.rg = rg(a.id);
  return push(std::move(n));
}

Var Tape::pairwise_sqdist(Var x) {
  Node n;
  n.op = Op::PairwiseSqDist;
  n.a = x.id;
  n.val = kern::pairwise_sqdist(nodes_[x.id].val);
  n.rg = rg(x.id);
  return push(std::move(n));
}

Var Tape::row_normalize(Var a) {
  const Mat& A = nodes_[a.id].val;
  Node n;
  n.op = Op::RowNormalize;
  n.a = a.id;
  n.val = A;
  n.aux.resize(A.rows());
  for (int i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols(); ++j) s += A(i, j);
    if (s == 0.0) throw NumericalError("row_normalize: zero row sum at row " + std::to_string(i));
    n.aux[i] = s;
    double* ri = n.val.row(i);
    for (int j = 0; j < A.cols(); ++j) ri[j] /= s;
  }
  n.rg = rg(a.id);
  return push(std::move(n));
}

Var Tape::center_cols(Var a) {
  const Mat& A = nodes_[a.id].val;
  Node n;
  n.op = Op::CenterCols;
  n.a = a.id;
  n.val = A;
  for (int j = 0; j < A.cols(); ++j) {
    double mean = 0.0;
    for (int i = 0; i < A.rows(); ++i) mean += A(i, j);
    mean /= A.rows();
    for (int i = 0; i < A.rows(); ++i) n.val(i, j) -= mean;
  }
  n.rg = rg(a.id);
  return push(std::move(n));
}

Var Tape::normalize_cols(Var a) {
  const Mat& A = nodes_[a.id].val;
  Node n;
  n.op = Op::NormalizeCols;
  n.a = a.id;
  n.val = A;
  n.aux.resize(A.cols());
  for (int j = 0; j < A.cols(); ++j) {
    double norm = 0.0;
    for (int i = 0; i < A.rows(); ++i) norm += A(i, j) * A(i, j);
    norm = std::sqrt(norm);
    n.aux[j] = norm;
    if (norm > 0.0)
      for (int i = 0; i < A.rows(); ++i) n.val(i, j) /= norm;
  }
  n.rg = rg(a.id);
  return push(std::move(n));
}

Var Tape::dot(Var a, Var b) {
  Node n;
  n.op = Op::Dot;
  n.a = a.id;
  n.b = b.id;
  n.val = Mat(1, 1);
  n.val(0, 0) = kern::dot(nodes_[a.id].val, nodes_[b.id].val);
  n.rg = rg(a.id) || rg(b.id);
  return push(std::move(n));
}

Var Tape::gauss_cdf(Var a, double pre_scale) {
  Node n;
  n.op = Op::GaussCdf;
  n.a = a.id;
  n.sc = pre_scale;
  n.val = nodes_[a.id].val;
  for (size_t k = 0; k < n.val.size(); ++k)
    n.val[k] = 0.5 * std::erfc(-(pre_scale * n.val[k]) / std::sqrt(2.0));
  n.rg = rg(a.id);
  return push(std::move(n));
}

Var Tape::hard_rows_st(Var a) {
  const Mat& A = nodes_[a.id].val;
  Node n;
  n.op = Op::HardRowsSt;
  n.a = a.id;
  n.val = Mat(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i) {
    int arg = 0;
    for (int j = 1; j < A.cols(); ++j)
      if (A(i, j) > A(i, arg)) arg = j;
    n.val(i, arg) = 1.0;
  }
  n.rg = rg(a.id);
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  require(nodes_[loss.id].val.rows() == 1 && nodes_[loss.id].val.cols() == 1,
          "backward: loss must be a 1x1 value");
  grad_of(loss.id)(0, 0) = 1.0;

  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.rg || n.grad.empty()) continue;
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Add: {
        if (rg(n.a)) {
          Mat& da = grad_of(n.a);
          for (size_t k = 0; k < g.size(); ++k) da[k] += g[k];
        }
        if (rg(n.b)) {
          Mat& db = grad_of(n.b);
          for (size_t k = 0; k < g.size(); ++k) db[k] += g[k];
        }
        break;
      }
      case Op::Sub: {
        if (rg(n.a)) {
          Mat& da = grad_of(n.a);
          for (size_t k = 0; k < g.size(); ++k) da[k] += g[k];
        }
        if (rg(n.b)) {
          Mat& db = grad_of(n.b);
          for (size_t k = 0; k < g.size(); ++k) db[k] -= g[k];
        }
        break;
      }
      case Op::Scale: {
        if (rg(n.a)) {
          Mat& da = grad_of(n.a);
          for (size_t k = 0; k < g.size(); ++k) da[k] += n.sc * g[k];
        }
        break;
      }
      case Op::Mul: {
        const Mat& A = nodes_[n.a].val;
        const Mat& B = nodes_[n.b].val;
        if (rg(n.a)) {
          Mat& da = grad_of(n.a);
          for (size_t k = 0; k < g.size(); ++k) da[k] += g[k] * B[k];
        }
        if (rg(n.b)) {
          Mat& db = grad_of(n.b);
          for (size_t k = 0; k < g.size(); ++k) db[k] += g[k] * A[k];
        }
        break;
      }
      case Op::ColScale: {
        const Mat& A = nodes_[n.a].val;
        const Mat& V = nodes_[n.b].val;
        if (rg(n.a)) {
          Mat& da = grad_of(n.a);
          for (int i = 0; i < A.rows(); ++i)
            for (int j = 0; j < A.cols(); ++j) da(i, j) += g(i, j) * V(0, j);
        }
        if (rg(n.b)) {
          Mat& dv = grad_of(n.b);
          for (int i = 0; i < A.rows(); ++i)
            for (int j = 0; j < A.cols(); ++j) dv(0, j) += g(i, j) * A(i, j);
        }
        break;
      }
      case Op::MatMul: {
        const Mat& A = nodes_[n.a].val;
        const Mat& B = nodes_[n.b].val;
        if (rg(n.a)) {
          const Mat d = kern::matmul_nt(g, B);  // dA = g B^T
          Mat& da = grad_of(n.a);
          for (size_t k = 0; k < da.size(); ++k) da[k] += d[k];
        }
        if (rg(n.b)) {
          const Mat d = kern::matmul_tn(A, g);  // dB = A^T g
          Mat& db = grad_of(n.b);
          for (size_t k = 0; k < db.size(); ++k) db[k] += d[k];
        }
        break;
      }
      case Op::Transpose: {
        if (rg(n.a)) {
          Mat& da = grad_of(n.a);
          for (int i = 0; i < g.rows(); ++i)
            for (int j = 0; j < g.cols(); ++j) da(j, i) += g(i, j);
        }
        break;
      }
      case Op::SoftmaxRows: {
        if (rg(n.a)) {
          const Mat& y = n.val;
          Mat& da = grad_of(n.a);
          for (int i = 0; i < y.rows(); ++i) {
            double inner = 0.0;
            for (int j = 0; j < y.cols(); ++j) inner += g(i, j) * y(i, j);
            for (int j = 0; j < y.cols(); ++j) da(i, j) += y(i, j) * (g(i, j) - inner);
          }
        }
        break;
      }
      case Op::Exp: {
        if (rg(n.a)) {
          Mat& da = grad_of(n.a);
          for (size_t k = 0; k < g.size(); ++k) da[k] += g[k] * n.val[k];
        }
        break;
      }
      case Op::Clamp01: {
        if (rg(n.a)) {
          const Mat& x = nodes_[n.a].val;
          Mat& da = grad_of(n.a);
          for (size_t k = 0; k < g.size(); ++k)
            if (x[k] > 0.0 && x[k] < 1.0) da[k] += g[k];
        }
        break;
      }
      case Op::PairwiseSqDist: {
        if (rg(n.a)) {
          kern::pairwise_sqdist_backward(nodes_[n.a].val, g, grad_of(n.a));
        }
        break;
      }
      case Op::RowNormalize: {
        if (rg(n.a)) {
          const Mat& y = n.val;
          Mat& da = grad_of(n.a);
          for (int i = 0; i < y.rows(); ++i) {
            double inner = 0.0;
            for (int j = 0; j < y.cols(); ++j) inner += g(i, j) * y(i, j);
            for (int j = 0; j < y.cols(); ++j)
              da(i, j) += (g(i, j) - inner) / n.aux[i];
          }
        }
        break;
      }
      case Op::CenterCols: {
        if (rg(n.a)) {
          Mat& da = grad_of(n.a);
          for (int j = 0; j < g.cols(); ++j) {
            double mean = 0.0;
            for (int i = 0; i < g.rows(); ++i) mean += g(i, j);
            mean /= g.rows();
            for (int i = 0; i < g.rows(); ++i) da(i, j) += g(i, j) - mean;
          }
        }
        break;
      }
      case Op::NormalizeCols: {
        if (rg(n.a)) {
          const Mat& y = n.val;
          Mat& da = grad_of(n.a);
          for (int j = 0; j < y.cols(); ++j) {
            if (n.aux[j] <= 0.0) continue;  // zero column: subgradient 0
            double inner = 0.0;
            for (int i = 0; i < y.rows(); ++i) inner += g(i, j) * y(i, j);
            for (int i = 0; i < y.rows(); ++i)
              da(i, j) += (g(i, j) - y(i, j) * inner) / n.aux[j];
          }
        }
        break;
      }
      case Op::Dot: {
        const double s = g(0, 0);
        const Mat& A = nodes_[n.a].val;
        const Mat& B = nodes_[n.b].val;
        if (rg(n.a)) {
          Mat& da = grad_of(n.a);
          for (size_t k = 0; k < da.size(); ++k) da[k] += s * B[k];
        }
        if (rg(n.b)) {
          Mat& db = grad_of(n.b);
          for (size_t k = 0; k < db.size(); ++k) db[k] += s * A[k];
        }
        break;
      }
      case Op::GaussCdf: {
        if (rg(n.a)) {
          const Mat& x = nodes_[n.a].val;
          Mat& da = grad_of(n.a);
          for (size_t k = 0; k < g.size(); ++k) {
            const double u = n.sc * x[k];
            da[k] += g[k] * n.sc * kInvSqrt2Pi * std::exp(-0.5 * u * u);
          }
        }
        break;
      }
      case Op::HardRowsSt: {
        if (rg(n.a)) {
          Mat& da = grad_of(n.a);
          for (size_t k = 0; k < g.size(); ++k) da[k] += g[k];
        }
        break;
      }
    }
  }
}

}  // namespace groupfs::ad
