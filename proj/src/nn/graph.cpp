#include "aucap/nn/graph.hpp"

#include <cmath>

#include "aucap/error.hpp"
#include "aucap/nn/functional.hpp"

namespace aucap::nn {
namespace {

void require_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::dimension_mismatch,
                std::string(op) + ": shape " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
}

}  // namespace

const Matrix& Var::value() const { return graph_->value(*this); }

Var Graph::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, {}, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(Parameter& p) {
  nodes_.push_back(Node{p.value, {}, false, true, {}, &p});
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Graph::record(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool req = false;
  for (const Var& v : inputs) req = req || nodes_[v.id_].requires_grad;
  if (!value.allFinite()) {
    throw Error(Errc::invalid_argument, "non-finite value produced in forward pass");
  }
  nodes_.push_back(Node{std::move(value), {}, false, req, req ? std::move(backward) : Backward{},
                        nullptr});
  return Var(this, nodes_.size() - 1);
}

void Graph::accumulate(Var v, const Matrix& grad) {
  Node& n = nodes_[v.id_];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = grad;
    n.has_grad = true;
  } else {
    n.grad += grad;
  }
}

void Graph::backward(Var loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw Error(Errc::invalid_argument, "backward() needs a 1x1 loss");
  }
  accumulate(loss, Matrix::Ones(1, 1));
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad) continue;
    if (n.param != nullptr) {
      n.param->grad += n.grad;
      n.param->has_grad = true;
    } else if (n.backward) {
      // Inputs always have smaller ids, so n.grad is final here.
      n.backward(*this, n.grad);
    }
  }
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  return a.graph().record(a.value() + b.value(), {a, b}, [a, b](Graph& g, const Matrix& go) {
    g.accumulate(a, go);
    g.accumulate(b, go);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  return a.graph().record(a.value() - b.value(), {a, b}, [a, b](Graph& g, const Matrix& go) {
    g.accumulate(a, go);
    g.accumulate(b, -go);
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  return a.graph().record(a.value().cwiseProduct(b.value()), {a, b},
                          [a, b](Graph& g, const Matrix& go) {
                            if (g.requires_grad(a)) g.accumulate(a, go.cwiseProduct(b.value()));
                            if (g.requires_grad(b)) g.accumulate(b, go.cwiseProduct(a.value()));
                          });
}

Var one_minus(Var a) {
  Matrix v = (1.0 - a.value().array()).matrix();
  return a.graph().record(std::move(v), {a}, [a](Graph& g, const Matrix& go) {
    g.accumulate(a, -go);
  });
}

Var scale(Var a, double factor) {
  return a.graph().record(a.value() * factor, {a}, [a, factor](Graph& g, const Matrix& go) {
    g.accumulate(a, go * factor);
  });
}

Var mul_constant(Var a, const Matrix& factor) {
  if (factor.rows() != a.rows() || factor.cols() != a.cols()) {
    throw Error(Errc::dimension_mismatch, "mul_constant: factor shape differs");
  }
  return a.graph().record(a.value().cwiseProduct(factor), {a},
                          [a, factor](Graph& g, const Matrix& go) {
                            g.accumulate(a, go.cwiseProduct(factor));
                          });
}

Var masked_blend(Var next, Var prev, const Eigen::VectorXd& mask) {
  require_same_shape(next, prev, "masked_blend");
  if (mask.size() != next.rows()) {
    throw Error(Errc::dimension_mismatch, "masked_blend: mask length differs from batch");
  }
  Matrix v = next.value();
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    if (mask[r] == 0.0) v.row(r) = prev.value().row(r);
  }
  return next.graph().record(std::move(v), {next, prev},
                             [next, prev, mask](Graph& g, const Matrix& go) {
                               Matrix gn = go, gp = go;
                               for (Eigen::Index r = 0; r < go.rows(); ++r) {
                                 if (mask[r] == 0.0) gn.row(r).setZero();
                                 else gp.row(r).setZero();
                               }
                               g.accumulate(next, gn);
                               g.accumulate(prev, gp);
                             });
}

Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw Error(Errc::invalid_argument, "concat_cols: no inputs");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw Error(Errc::dimension_mismatch, "concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix v(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    v.middleCols(off, p.cols()) = p.value();
    offsets.push_back(off);
    off += p.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].graph().record(std::move(v), parts,
                                 [inputs, offsets](Graph& g, const Matrix& go) {
                                   for (std::size_t i = 0; i < inputs.size(); ++i) {
                                     if (g.requires_grad(inputs[i])) {
                                       g.accumulate(inputs[i],
                                                    go.middleCols(offsets[i], inputs[i].cols()));
                                     }
                                   }
                                 });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw Error(Errc::invalid_argument, "concat_rows: no inputs");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw Error(Errc::dimension_mismatch, "concat_rows: column counts differ");
    rows += p.rows();
  }
  Matrix v(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    v.middleRows(off, p.rows()) = p.value();
    offsets.push_back(off);
    off += p.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].graph().record(std::move(v), parts,
                                 [inputs, offsets](Graph& g, const Matrix& go) {
                                   for (std::size_t i = 0; i < inputs.size(); ++i) {
                                     if (g.requires_grad(inputs[i])) {
                                       g.accumulate(inputs[i],
                                                    go.middleRows(offsets[i], inputs[i].rows()));
                                     }
                                   }
                                 });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw Error(Errc::dimension_mismatch, "slice_rows out of range");
  }
  return a.graph().record(a.value().middleRows(start, count), {a},
                          [a, start, count](Graph& g, const Matrix& go) {
                            Matrix full = Matrix::Zero(a.rows(), a.cols());
                            full.middleRows(start, count) = go;
                            g.accumulate(a, full);
                          });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw Error(Errc::dimension_mismatch, "slice_cols out of range");
  }
  return a.graph().record(a.value().middleCols(start, count), {a},
                          [a, start, count](Graph& g, const Matrix& go) {
                            Matrix full = Matrix::Zero(a.rows(), a.cols());
                            full.middleCols(start, count) = go;
                            g.accumulate(a, full);
                          });
}

Var linear(Var x, Var weight) {
  if (x.cols() != weight.cols()) {
    throw Error(Errc::dimension_mismatch, "linear: input width " + std::to_string(x.cols()) +
                                              " vs weight in-dim " + std::to_string(weight.cols()));
  }
  return x.graph().record(x.value() * weight.value().transpose(), {x, weight},
                          [x, weight](Graph& g, const Matrix& go) {
                            if (g.requires_grad(x)) g.accumulate(x, go * weight.value());
                            if (g.requires_grad(weight)) {
                              g.accumulate(weight, go.transpose() * x.value());
                            }
                          });
}

Var linear(Var x, Var weight, Var bias) {
  if (bias.rows() != 1 || bias.cols() != weight.rows()) {
    throw Error(Errc::dimension_mismatch, "linear: bias must be 1 x out");
  }
  Var xw = linear(x, weight);
  Matrix v = xw.value().rowwise() + bias.value().row(0);
  return x.graph().record(std::move(v), {xw, bias}, [xw, bias](Graph& g, const Matrix& go) {
    g.accumulate(xw, go);
    if (g.requires_grad(bias)) g.accumulate(bias, go.colwise().sum());
  });
}

Var embedding_lookup(Var table, std::span<const std::int32_t> indices) {
  const Matrix& t = table.value();
  Matrix v(static_cast<Eigen::Index>(indices.size()), t.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= t.rows()) {
      throw Error(Errc::invalid_argument, "embedding index " + std::to_string(indices[i]) +
                                              " out of range");
    }
    v.row(static_cast<Eigen::Index>(i)) = t.row(indices[i]);
  }
  std::vector<std::int32_t> idx(indices.begin(), indices.end());
  return table.graph().record(std::move(v), {table}, [table, idx](Graph& g, const Matrix& go) {
    Matrix full = Matrix::Zero(table.rows(), table.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) full.row(idx[i]) += go.row(static_cast<Eigen::Index>(i));
    g.accumulate(table, full);
  });
}

Var sigmoid(Var a) {
  Matrix y = nn::sigmoid(a.value());
  return a.graph().record(y, {a}, [a, y](Graph& g, const Matrix& go) {
    g.accumulate(a, go.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var tanh(Var a) {
  Matrix y = a.value().array().tanh().matrix();
  return a.graph().record(y, {a}, [a, y](Graph& g, const Matrix& go) {
    g.accumulate(a, go.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var relu(Var a) {
  Matrix y = nn::relu(a.value());
  return a.graph().record(y, {a}, [a](Graph& g, const Matrix& go) {
    g.accumulate(a, (a.value().array() > 0.0).cast<double>().matrix().cwiseProduct(go));
  });
}

Var leaky_relu(Var a, double alpha) {
  Matrix y = nn::leaky_relu(a.value(), alpha);
  return a.graph().record(y, {a}, [a, alpha](Graph& g, const Matrix& go) {
    const Matrix slope =
        (a.value().array() > 0.0).select(Matrix::Ones(a.rows(), a.cols()), alpha).matrix();
    g.accumulate(a, go.cwiseProduct(slope));
  });
}

Var softmax_rows(Var a) {
  Matrix y = nn::softmax_rows(a.value());
  return a.graph().record(y, {a}, [a, y](Graph& g, const Matrix& go) {
    const Eigen::VectorXd dot = go.cwiseProduct(y).rowwise().sum();
    g.accumulate(a, y.cwiseProduct(go - dot.replicate(1, go.cols())));
  });
}

Var batch_norm_train(Var x, Var gamma, Var beta, double eps) {
  const Eigen::Index n = x.rows();
  if (n < 2) {
    throw Error(Errc::invalid_argument, "batch_norm: train mode needs a batch of at least 2");
  }
  if (gamma.cols() != x.cols() || beta.cols() != x.cols()) {
    throw Error(Errc::dimension_mismatch, "batch_norm: gamma/beta width differs from input");
  }
  const Eigen::RowVectorXd mean = x.value().colwise().mean();
  const Matrix centered = x.value().rowwise() - mean;
  const Eigen::RowVectorXd var = centered.array().square().colwise().mean();
  const Eigen::RowVectorXd inv_std = (var.array() + eps).rsqrt();
  const Matrix xhat = centered.array().rowwise() * inv_std.array();
  Matrix y = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() +
             beta.value().row(0).array();
  return x.graph().record(std::move(y), {x, gamma, beta},
                          [x, gamma, beta, xhat, inv_std, n](Graph& g, const Matrix& go) {
                            if (g.requires_grad(gamma)) {
                              g.accumulate(gamma, go.cwiseProduct(xhat).colwise().sum());
                            }
                            if (g.requires_grad(beta)) g.accumulate(beta, go.colwise().sum());
                            if (g.requires_grad(x)) {
                              const Matrix gxhat =
                                  go.array().rowwise() * gamma.value().row(0).array();
                              const Eigen::RowVectorXd sum_g = gxhat.colwise().sum();
                              const Eigen::RowVectorXd sum_gx = gxhat.cwiseProduct(xhat).colwise().sum();
                              Matrix gx = (static_cast<double>(n) * gxhat).rowwise() - sum_g;
                              gx -= (xhat.array().rowwise() * sum_gx.array()).matrix();
                              gx = (gx.array().rowwise() * (inv_std.array() / static_cast<double>(n)))
                                       .matrix();
                              g.accumulate(x, gx);
                            }
                          });
}

Var batch_norm_infer(Var x, Var gamma, Var beta, const Eigen::RowVectorXd& mean,
                     const Eigen::RowVectorXd& var, double eps) {
  if (gamma.cols() != x.cols() || mean.size() != x.cols()) {
    throw Error(Errc::dimension_mismatch, "batch_norm: statistics width differs from input");
  }
  const Eigen::RowVectorXd inv_std = (var.array() + eps).rsqrt();
  const Matrix xhat = (x.value().rowwise() - mean).array().rowwise() * inv_std.array();
  Matrix y = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() +
             beta.value().row(0).array();
  return x.graph().record(std::move(y), {x, gamma, beta},
                          [x, gamma, beta, xhat, inv_std](Graph& g, const Matrix& go) {
                            if (g.requires_grad(gamma)) {
                              g.accumulate(gamma, go.cwiseProduct(xhat).colwise().sum());
                            }
                            if (g.requires_grad(beta)) g.accumulate(beta, go.colwise().sum());
                            if (g.requires_grad(x)) {
                              g.accumulate(x, (go.array().rowwise() *
                                               (gamma.value().row(0).array() * inv_std.array()))
                                                  .matrix());
                            }
                          });
}

Var cross_entropy(Var probs, std::span<const std::int32_t> targets) {
  const Eigen::Index n = probs.rows();
  if (static_cast<Eigen::Index>(targets.size()) != n || n == 0) {
    throw Error(Errc::dimension_mismatch, "cross_entropy: one target per row required");
  }
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto t = targets[static_cast<std::size_t>(r)];
    if (t < 0 || t >= probs.cols()) {
      throw Error(Errc::invalid_argument, "cross_entropy: target index " + std::to_string(t) +
                                              " out of range");
    }
    loss -= std::log(std::max(probs.value()(r, t), kProbFloor));
  }
  loss /= static_cast<double>(n);
  std::vector<std::int32_t> tg(targets.begin(), targets.end());
  return probs.graph().record(Matrix::Constant(1, 1, loss), {probs},
                              [probs, tg, n](Graph& g, const Matrix& go) {
                                Matrix grad = Matrix::Zero(probs.rows(), probs.cols());
                                for (Eigen::Index r = 0; r < n; ++r) {
                                  const double p = probs.value()(r, tg[static_cast<std::size_t>(r)]);
                                  if (p > kProbFloor) {
                                    grad(r, tg[static_cast<std::size_t>(r)]) =
                                        -go(0, 0) / (p * static_cast<double>(n));
                                  }
                                }
                                g.accumulate(probs, grad);
                              });
}

Var sigmoid_binary_cross_entropy(Var logits, const Matrix& targets) {
  if (targets.rows() != logits.rows() || targets.cols() != logits.cols()) {
    throw Error(Errc::dimension_mismatch, "binary cross-entropy: target shape differs");
  }
  const double count = static_cast<double>(logits.value().size());
  // max(x, 0) - x*y + ln(1 + exp(-|x|))
  const Matrix& x = logits.value();
  const double loss = (x.cwiseMax(0.0) - x.cwiseProduct(targets) +
                       (-x.cwiseAbs()).array().exp().log1p().matrix())
                          .sum() /
                      count;
  return logits.graph().record(Matrix::Constant(1, 1, loss), {logits},
                               [logits, targets, count](Graph& g, const Matrix& go) {
                                 const Matrix p = nn::sigmoid(logits.value());
                                 g.accumulate(logits, (p - targets) * (go(0, 0) / count));
                               });
}

Var sum_all(Var a) {
  return a.graph().record(Matrix::Constant(1, 1, a.value().sum()), {a},
                          [a](Graph& g, const Matrix& go) {
                            g.accumulate(a, Matrix::Constant(a.rows(), a.cols(), go(0, 0)));
                          });
}

}  // namespace aucap::nn
