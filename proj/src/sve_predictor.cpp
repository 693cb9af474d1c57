#include "aucap/sve_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aucap/error.hpp"
#include "aucap/nn/adam.hpp"
#include "aucap/nn/functional.hpp"

namespace aucap::sve {

using nn::Graph;
using nn::Matrix;
using nn::Mode;
using nn::Var;

Mlp::Mlp(Eigen::Index input_dim, Eigen::Index labels, const std::vector<Eigen::Index>& hidden,
         Rng& rng) {
  if (input_dim <= 0 || labels <= 0) {
    throw Error(Errc::invalid_argument, "MLP needs positive input and label counts");
  }
  Eigen::Index in = input_dim;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    layers_.emplace_back("mlp.hidden" + std::to_string(i), in, hidden[i], rng);
    in = hidden[i];
  }
  layers_.emplace_back("mlp.output", in, labels, rng);
}

std::vector<nn::Parameter*> Mlp::parameters() {
  std::vector<nn::Parameter*> out;
  for (auto& l : layers_) {
    for (nn::Parameter* p : l.parameters()) out.push_back(p);
  }
  return out;
}

Var Mlp::logits(Graph& g, Var x, Mode mode, double dropout, Rng& rng) {
  if (x.cols() != input_dim()) {
    throw Error(Errc::dimension_mismatch, "MLP expects " + std::to_string(input_dim()) +
                                              " input features, got " + std::to_string(x.cols()));
  }
  Var h = nn::dropout(x, dropout, mode, rng);
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) h = nn::relu(layers_[i].forward(g, h));
  return layers_.back().forward(g, h);
}

Matrix Mlp::predict(const Matrix& features) {
  Graph g;
  Rng unused(0);
  const Var z = logits(g, g.constant(features), Mode::infer, 0.0, unused);
  return nn::sigmoid(z.value());
}

nn::TensorStore Mlp::to_store() const {
  nn::TensorStore store;
  store.metadata = "{\"model\":\"mlp\",\"layers\":" + std::to_string(layers_.size()) + "}";
  for (const auto& l : layers_) {
    store.tensors.push_back({l.weight.name, l.weight.value});
    store.tensors.push_back({l.bias.name, l.bias.value});
  }
  return store;
}

Mlp Mlp::from_store(const nn::TensorStore& store) {
  if (store.tensors.size() < 2 || store.tensors.size() % 2 != 0) {
    throw Error(Errc::malformed, "MLP checkpoint must hold weight/bias pairs");
  }
  Mlp m;
  for (std::size_t i = 0; i < store.tensors.size(); i += 2) {
    const auto& w = store.tensors[i];
    const auto& b = store.tensors[i + 1];
    if (b.value.rows() != 1 || b.value.cols() != w.value.rows()) {
      throw Error(Errc::malformed, "MLP checkpoint: bias '" + b.name + "' does not fit '" +
                                       w.name + "'");
    }
    if (!m.layers_.empty() && m.layers_.back().out_dim() != w.value.cols()) {
      throw Error(Errc::malformed, "MLP checkpoint: layer '" + w.name + "' does not chain");
    }
    nn::Dense d;
    d.weight = nn::Parameter(w.name, w.value);
    d.bias = nn::Parameter(b.name, b.value);
    m.layers_.push_back(std::move(d));
  }
  return m;
}

double binary_cross_entropy(const Matrix& probs, const Matrix& targets) {
  const Eigen::ArrayXXd p = probs.array().max(nn::kProbFloor).min(1.0 - nn::kProbFloor);
  const Eigen::ArrayXXd t = targets.array();
  return -(t * p.log() + (1.0 - t) * (1.0 - p).log()).mean();
}

namespace {

std::vector<std::vector<Eigen::Index>> make_batches(Eigen::Index n, int batch, Rng& rng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  shuffle(order, rng);
  std::vector<std::vector<Eigen::Index>> out;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch)) {
    const auto end = std::min(order.size(), i + static_cast<std::size_t>(batch));
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace

MlpTrainResult train_mlp(const Matrix& features, const Matrix& targets, const Matrix& val_features,
                         const Matrix& val_targets, const MlpConfig& config) {
  if (features.rows() == 0) throw Error(Errc::empty_input, "MLP training set is empty");
  if (targets.rows() != features.rows() || val_targets.rows() != val_features.rows()) {
    throw Error(Errc::dimension_mismatch, "MLP feature and target row counts differ");
  }
  auto binary = [](const Matrix& m) {
    return ((m.array() == 0.0) || (m.array() == 1.0)).all();
  };
  if (!binary(targets) || !binary(val_targets)) {
    throw Error(Errc::invalid_argument, "MLP targets must be 0/1");
  }
  if (config.batch < 1 || config.epochs < 1) {
    throw Error(Errc::invalid_argument, "MLP epochs and batch must be positive");
  }

  Rng rng(config.seed);
  MlpTrainResult result;
  result.model = Mlp(features.cols(), targets.cols(), config.hidden, rng);
  Mlp& model = result.model;
  nn::Adam adam(model.parameters(), {.learning_rate = config.learning_rate});

  const bool has_val = val_features.rows() > 0;
  const Matrix& score_x = has_val ? val_features : features;
  const Matrix& score_y = has_val ? val_targets : targets;

  double best = std::numeric_limits<double>::infinity();
  std::vector<Matrix> best_params;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double total = 0.0;
    const auto batches = make_batches(features.rows(), config.batch, rng);
    for (const auto& idx : batches) {
      Matrix xb(static_cast<Eigen::Index>(idx.size()), features.cols());
      Matrix yb(static_cast<Eigen::Index>(idx.size()), targets.cols());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        xb.row(static_cast<Eigen::Index>(i)) = features.row(idx[i]);
        yb.row(static_cast<Eigen::Index>(i)) = targets.row(idx[i]);
      }
      Graph g;
      const Var z = model.logits(g, g.constant(std::move(xb)), Mode::train, config.dropout, rng);
      const Var loss = nn::sigmoid_binary_cross_entropy(z, yb);
      total += loss.value()(0, 0);
      g.backward(loss);
      adam.step();
    }
    result.train_loss.push_back(total / static_cast<double>(batches.size()));

    const double score = binary_cross_entropy(model.predict(score_x), score_y);
    result.validation_loss.push_back(score);
    if (score < best) {
      best = score;
      result.best_epoch = epoch;
      best_params.clear();
      for (nn::Parameter* p : model.parameters()) best_params.push_back(p->value);
    }
  }
  const auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_params[i];
  return result;
}

}  // namespace aucap::sve
