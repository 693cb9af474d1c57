#pragma once

// Reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Graph records every operation of one forward pass. Rows are batch
// examples throughout. Parameters live outside the graph; Graph::param()
// wraps one as a leaf and backward() accumulates into Parameter::grad.

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace aucap::nn {

using Matrix = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool has_grad = false;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() {
    grad.setZero(value.rows(), value.cols());
    has_grad = false;
  }
};

enum class Mode { train, infer };

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf without gradient.
  Var constant(Matrix value);
  /// Leaf whose gradient flows into p.grad on backward().
  Var param(Parameter& p);

  /// Records an op. backward receives the node's output gradient and must
  /// call accumulate() for each input that requires a gradient.
  using Backward = std::function<void(Graph&, const Matrix& grad_out)>;
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Matrix value, std::span<const Var> inputs, Backward backward);

  const Matrix& value(Var v) const { return nodes_[v.id_].value; }
  bool requires_grad(Var v) const { return nodes_[v.id_].requires_grad; }
  void accumulate(Var v, const Matrix& grad);
  template <typename Expr>
  void accumulate(Var v, const Eigen::MatrixBase<Expr>& grad) {
    accumulate(v, Matrix(grad));
  }

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 loss and propagates to parameters.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    bool requires_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };

  std::deque<Node> nodes_;
};

// ---- elementwise and structural ops -------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var one_minus(Var a);
Var scale(Var a, double factor);
/// Elementwise product with a fixed matrix (dropout masks).
Var mul_constant(Var a, const Matrix& factor);
/// mask (rows x 1, entries 0/1) selects updated rows: m * next + (1 - m) * prev.
Var masked_blend(Var next, Var prev, const Eigen::VectorXd& mask);

Var concat_cols(std::span<const Var> parts);
Var concat_cols(std::initializer_list<Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);

// ---- dense algebra ------------------------------------------------------

/// x * W^T (+ bias broadcast over rows). W is out x in, bias 1 x out.
Var linear(Var x, Var weight);
Var linear(Var x, Var weight, Var bias);

/// Gathers rows of table (V x E) by index.
Var embedding_lookup(Var table, std::span<const std::int32_t> indices);

// ---- activations --------------------------------------------------------

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var leaky_relu(Var a, double alpha = 0.3);
Var softmax_rows(Var a);

// ---- normalization ------------------------------------------------------

/// (x - mean) / sqrt(var + eps) * gamma + beta with batch statistics over
/// rows (biased variance). Requires at least two rows.
Var batch_norm_train(Var x, Var gamma, Var beta, double eps);
/// Same affine map with fixed statistics.
Var batch_norm_infer(Var x, Var gamma, Var beta, const Eigen::RowVectorXd& mean,
                     const Eigen::RowVectorXd& var, double eps);

// ---- losses (1 x 1 outputs) ---------------------------------------------

inline constexpr double kProbFloor = 1e-12;

/// Mean over rows of -ln(max(p[target], 1e-12)).
Var cross_entropy(Var probs, std::span<const std::int32_t> targets);
/// Mean over all entries of the per-label binary cross-entropy on logits.
Var sigmoid_binary_cross_entropy(Var logits, const Matrix& targets);
Var sum_all(Var a);

}  // namespace aucap::nn
