#pragma once

#include <vector>

#include "groupfs/mat.hpp"

namespace groupfs::ad {

struct Var {
  int id = -1;
};

// Eager reverse-mode tape over dense matrices. Values are computed when an op
// is recorded; backward() replays the tape in reverse and accumulates exact
// gradients into every leaf created with requires_grad. The op set is exactly
// what the composite loss needs -- this is not a general autodiff framework.
class Tape {
 public:
  Var constant(Mat value) { return leaf(std::move(value), false); }
  Var param(Mat value) { return leaf(std::move(value), true); }
  Var leaf(Mat value, bool requires_grad);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double s);
  Var mul(Var a, Var b);       // elementwise, same shape
  Var colscale(Var a, Var v);  // a(m x n) with column j scaled by v(0, j)
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var softmax_rows(Var a);
  Var exp_elem(Var a);
  Var clamp01(Var a);  // subgradient 0 outside the open interval (0,1)
  Var pairwise_sqdist(Var x);
  Var row_normalize(Var a);
  Var center_cols(Var a);
  Var normalize_cols(Var a);  // unit l2 columns; zero columns stay zero
  Var dot(Var a, Var b);      // sum(a .* b) as a 1x1 value
  Var gauss_cdf(Var a, double pre_scale);  // Phi(pre_scale * a) elementwise
  // Straight-through rows: value is one-hot at the row argmax, gradient
  // passes through unchanged.
  Var hard_rows_st(Var a);

  const Mat& value(Var v) const { return nodes_[v.id].val; }
  /// Valid after backward(); empty for leaves no gradient reached.
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }

  /// Reverse sweep from a scalar (1x1) node.
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    Leaf, Add, Sub, Scale, Mul, ColScale, MatMul, Transpose, SoftmaxRows,
    Exp, Clamp01, PairwiseSqDist, RowNormalize, CenterCols, NormalizeCols,
    Dot, GaussCdf, HardRowsSt,
  };
  struct Node {
    Op op = Op::Leaf;
    int a = -1, b = -1;
    double sc = 0.0;
    Mat val;
    Mat grad;
    std::vector<double> aux;  // row sums / column norms where backward needs them
    bool rg = false;
  };

  Var push(Node n);
  Mat& grad_of(int id);
  bool rg(int id) const { return nodes_[id].rg; }

  std::vector<Node> nodes_;
};

}  // namespace groupfs::ad
