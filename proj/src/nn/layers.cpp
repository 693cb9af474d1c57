#include "aucap/nn/layers.hpp"

#include "aucap/error.hpp"

namespace aucap::nn {

Dense::Dense(std::string name, Eigen::Index in, Eigen::Index out, Rng& rng)
    : weight(name + ".weight", glorot_uniform(out, in, rng)),
      bias(name + ".bias", Matrix::Zero(1, out)) {}

Var Dense::forward(Graph& g, Var x) { return linear(x, g.param(weight), g.param(bias)); }

GruCell::GruCell(std::string name, Eigen::Index input, Eigen::Index hidden, Rng& rng,
                 bool use_bias)
    : use_bias_(use_bias) {
  auto gate = [&](const std::string& suffix) {
    Matrix w(hidden, hidden + input);
    w.leftCols(hidden) = orthogonal(hidden, rng);
    w.rightCols(input) = glorot_uniform(hidden, input, rng);
    return Parameter(name + "." + suffix, std::move(w));
  };
  w_update = gate("w_update");
  w_reset = gate("w_reset");
  w_candidate = gate("w_candidate");
  b_update = Parameter(name + ".b_update", Matrix::Zero(1, hidden));
  b_reset = Parameter(name + ".b_reset", Matrix::Zero(1, hidden));
  b_candidate = Parameter(name + ".b_candidate", Matrix::Zero(1, hidden));
}

std::vector<Parameter*> GruCell::parameters() {
  if (!use_bias_) return {&w_update, &w_reset, &w_candidate};
  return {&w_update, &w_reset, &w_candidate, &b_update, &b_reset, &b_candidate};
}

GruWeights<double> GruCell::weights() const {
  GruWeights<double> w;
  w.w_update = w_update.value;
  w.w_reset = w_reset.value;
  w.w_candidate = w_candidate.value;
  w.b_update = use_bias_ ? Eigen::RowVectorXd(b_update.value.row(0))
                         : Eigen::RowVectorXd::Zero(hidden());
  w.b_reset = use_bias_ ? Eigen::RowVectorXd(b_reset.value.row(0))
                        : Eigen::RowVectorXd::Zero(hidden());
  w.b_candidate = use_bias_ ? Eigen::RowVectorXd(b_candidate.value.row(0))
                            : Eigen::RowVectorXd::Zero(hidden());
  return w;
}

void GruCell::set_weights(const GruWeights<double>& w) {
  w_update.value = w.w_update;
  w_reset.value = w.w_reset;
  w_candidate.value = w.w_candidate;
  b_update.value = w.b_update;
  b_reset.value = w.b_reset;
  b_candidate.value = w.b_candidate;
  for (Parameter* p : {&w_update, &w_reset, &w_candidate, &b_update, &b_reset, &b_candidate}) {
    p->zero_grad();
  }
}

Var GruCell::step(Graph& g, Var x, Var h_prev) {
  if (x.cols() != input() || h_prev.cols() != hidden() || x.rows() != h_prev.rows()) {
    throw Error(Errc::dimension_mismatch,
                "GRU step: expected x of width " + std::to_string(input()) + " and h of width " +
                    std::to_string(hidden()) + ", got " + std::to_string(x.cols()) + " and " +
                    std::to_string(h_prev.cols()));
  }
  auto gate_input = [&](Parameter& w, Parameter& b, Var in) {
    return use_bias_ ? linear(in, g.param(w), g.param(b)) : linear(in, g.param(w));
  };
  const Var hx = concat_cols({h_prev, x});
  const Var z = sigmoid(gate_input(w_update, b_update, hx));
  const Var r = sigmoid(gate_input(w_reset, b_reset, hx));
  const Var candidate = tanh(gate_input(w_candidate, b_candidate, concat_cols({mul(r, h_prev), x})));
  return add(mul(one_minus(z), h_prev), mul(z, candidate));
}

std::vector<Var> gru_forward(Graph& g, GruCell& cell, std::span<const Var> seq,
                             std::span<const Eigen::VectorXd> masks) {
  if (seq.empty()) throw Error(Errc::empty_input, "GRU over an empty sequence");
  if (!masks.empty() && masks.size() != seq.size()) {
    throw Error(Errc::dimension_mismatch, "GRU: one mask per time step required");
  }
  std::vector<Var> states;
  states.reserve(seq.size());
  Var h = g.constant(Matrix::Zero(seq[0].rows(), cell.hidden()));
  for (std::size_t t = 0; t < seq.size(); ++t) {
    Var next = cell.step(g, seq[t], h);
    if (!masks.empty()) next = masked_blend(next, h, masks[t]);
    states.push_back(next);
    h = next;
  }
  return states;
}

BiGruOutput bigru_forward(Graph& g, GruCell& forward_cell, GruCell& backward_cell,
                          std::span<const Var> seq) {
  std::vector<Var> reversed(seq.rbegin(), seq.rend());
  const std::vector<Var> fwd = gru_forward(g, forward_cell, seq);
  const std::vector<Var> bwd = gru_forward(g, backward_cell, reversed);
  BiGruOutput out;
  const std::size_t n = seq.size();
  out.sequence.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    out.sequence.push_back(concat_cols({fwd[t], bwd[n - 1 - t]}));
  }
  out.final_state = concat_cols({fwd.back(), bwd.back()});
  return out;
}

BatchNorm::BatchNorm(std::string name, Eigen::Index dim, double mom, double epsilon)
    : gamma(name + ".gamma", Matrix::Ones(1, dim)),
      beta(name + ".beta", Matrix::Zero(1, dim)),
      running_mean(Eigen::RowVectorXd::Zero(dim)),
      running_var(Eigen::RowVectorXd::Ones(dim)),
      momentum(mom),
      eps(epsilon),
      mean_acc_(Eigen::RowVectorXd::Zero(dim)),
      var_acc_(Eigen::RowVectorXd::Zero(dim)) {}

Var BatchNorm::forward(Graph& g, Var x, Mode mode) {
  if (mode == Mode::infer) {
    return batch_norm_infer(x, g.param(gamma), g.param(beta), running_mean, running_var, eps);
  }
  Var y = batch_norm_train(x, g.param(gamma), g.param(beta), eps);
  const double n = static_cast<double>(x.rows());
  const Eigen::RowVectorXd mean = x.value().colwise().mean();
  const Eigen::RowVectorXd var =
      (x.value().rowwise() - mean).array().square().colwise().sum() / (n - 1.0);
  if (mean_acc_.size() != mean.size()) {
    mean_acc_.setZero(mean.size());
    var_acc_.setZero(mean.size());
    decay_ = 1.0;
  }
  mean_acc_ = momentum * mean_acc_ + (1.0 - momentum) * mean;
  var_acc_ = momentum * var_acc_ + (1.0 - momentum) * var;
  decay_ *= momentum;
  if (decay_ < 1.0) {
    running_mean = mean_acc_ / (1.0 - decay_);
    running_var = var_acc_ / (1.0 - decay_);
  } else {
    running_mean = mean;
    running_var = var;
  }
  return y;
}

std::vector<Var> BatchNorm::forward_sequence(Graph& g, std::span<const Var> seq, Mode mode) {
  if (seq.empty()) return {};
  const Var stacked = concat_rows(seq);
  const Var normed = forward(g, stacked, mode);
  std::vector<Var> out;
  out.reserve(seq.size());
  Eigen::Index offset = 0;
  for (const Var& s : seq) {
    out.push_back(slice_rows(normed, offset, s.rows()));
    offset += s.rows();
  }
  return out;
}

Embedding::Embedding(std::string name, Eigen::Index vocab, Eigen::Index dim, Rng& rng)
    : table(name + ".table", uniform_matrix(vocab, dim, -0.05, 0.05, rng)) {}

Var Embedding::forward(Graph& g, std::span<const std::int32_t> indices) {
  return embedding_lookup(g.param(table), indices);
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix m(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = uniform01(rng) < rate ? 0.0 : keep_scale;
  }
  return m;
}

Var dropout(Var x, double rate, Mode mode, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw Error(Errc::invalid_argument, "dropout rate must be in [0, 1)");
  if (mode == Mode::infer || rate == 0.0) return x;
  return mul_constant(x, dropout_mask(x.rows(), x.cols(), rate, rng));
}

}  // namespace aucap::nn
