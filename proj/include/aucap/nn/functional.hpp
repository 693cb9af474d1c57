#pragma once

// Gradient-free forward math on Eigen expressions, templated on the scalar
// type. The graph ops in graph.hpp compute the same functions with
// gradients; these versions are the reference for tests and the fast path
// for pure inference helpers.

#include <Eigen/Dense>
#include <cmath>

namespace aucap::nn {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) {
    return v >= Scalar(0) ? Scalar(1) / (Scalar(1) + std::exp(-v))
                          : std::exp(v) / (Scalar(1) + std::exp(v));
  });
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

/// x for x > 0, alpha * x otherwise.
template <typename Derived>
auto leaky_relu(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar alpha = 0.3) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([alpha](Scalar v) { return v > Scalar(0) ? v : alpha * v; });
}

/// Row-wise softmax with max subtraction.
template <typename Derived>
typename Derived::PlainObject softmax_rows(const Eigen::MatrixBase<Derived>& x) {
  typename Derived::PlainObject out = x;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    out.row(r).array() -= out.row(r).maxCoeff();
    out.row(r) = out.row(r).array().exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

/// Weights for one GRU cell. Each gate matrix is hidden x (hidden + input)
/// and acts on the concatenation [h_prev, x].
template <typename Scalar>
struct GruWeights {
  MatrixX<Scalar> w_update;
  MatrixX<Scalar> w_reset;
  MatrixX<Scalar> w_candidate;
  RowVectorX<Scalar> b_update;
  RowVectorX<Scalar> b_reset;
  RowVectorX<Scalar> b_candidate;

  Eigen::Index hidden() const { return w_update.rows(); }
  Eigen::Index input() const { return w_update.cols() - w_update.rows(); }

  static GruWeights zeros(Eigen::Index hidden, Eigen::Index input) {
    GruWeights w;
    w.w_update = w.w_reset = w.w_candidate = MatrixX<Scalar>::Zero(hidden, hidden + input);
    w.b_update = w.b_reset = w.b_candidate = RowVectorX<Scalar>::Zero(hidden);
    return w;
  }
};

/// One GRU step on a batch (rows are examples):
///   z = s(Wz [h, x]), r = s(Wr [h, x]), c = tanh(W [r*h, x]),
///   h' = (1 - z) * h + z * c.
template <typename Scalar, typename DerivedX, typename DerivedH>
MatrixX<Scalar> gru_cell_step(const Eigen::MatrixBase<DerivedX>& x,
                              const Eigen::MatrixBase<DerivedH>& h_prev,
                              const GruWeights<Scalar>& w) {
  const Eigen::Index batch = x.rows();
  MatrixX<Scalar> hx(batch, h_prev.cols() + x.cols());
  hx << h_prev, x;
  const MatrixX<Scalar> z =
      sigmoid((hx * w.w_update.transpose()).rowwise() + w.b_update).eval();
  const MatrixX<Scalar> r =
      sigmoid((hx * w.w_reset.transpose()).rowwise() + w.b_reset).eval();
  MatrixX<Scalar> rhx(batch, hx.cols());
  rhx << r.cwiseProduct(h_prev), x;
  const MatrixX<Scalar> c =
      ((rhx * w.w_candidate.transpose()).rowwise() + w.b_candidate).array().tanh().matrix();
  return (MatrixX<Scalar>::Ones(batch, z.cols()) - z).cwiseProduct(h_prev) + z.cwiseProduct(c);
}

}  // namespace aucap::nn
