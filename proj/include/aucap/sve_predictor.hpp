#pragma once

// Multilabel MLP mapping a clip-level audio vector to subject-verb
// probabilities.

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "aucap/nn/checkpoint.hpp"
#include "aucap/nn/layers.hpp"

namespace aucap::sve {

struct MlpConfig {
  std::vector<Eigen::Index> hidden = {1024, 1024, 512, 512, 256, 256};
  double dropout = 0.5;  // on the input connections
  int epochs = 100;
  int batch = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(Eigen::Index input_dim, Eigen::Index labels, const std::vector<Eigen::Index>& hidden,
      Rng& rng);

  /// Pre-sigmoid scores (B x K).
  nn::Var logits(nn::Graph& g, nn::Var x, nn::Mode mode, double dropout, Rng& rng);
  /// Sigmoid probabilities in infer mode. Errc::dimension_mismatch on width.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& features);

  Eigen::Index input_dim() const { return layers_.front().in_dim(); }
  Eigen::Index labels() const { return layers_.back().out_dim(); }
  std::vector<nn::Dense>& layers() { return layers_; }
  std::vector<nn::Parameter*> parameters();

  nn::TensorStore to_store() const;
  static Mlp from_store(const nn::TensorStore& store);
  void save(const std::filesystem::path& path) const { to_store().save(path); }
  static Mlp load(const std::filesystem::path& path) {
    return from_store(nn::TensorStore::load(path));
  }

 private:
  std::vector<nn::Dense> layers_;
};

struct MlpTrainResult {
  Mlp model;
  std::vector<double> train_loss;       // mean mini-batch loss per epoch
  std::vector<double> validation_loss;  // infer-mode loss per epoch
  int best_epoch = 0;                   // 1-based
};

/// Per-label binary cross-entropy minimized with Adam. Keeps the parameters
/// of the epoch with the lowest validation loss; without validation data the
/// training set is scored in infer mode instead. Errc::empty_input on an
/// empty training set, Errc::invalid_argument for non-binary targets.
MlpTrainResult train_mlp(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                         const Eigen::MatrixXd& val_features, const Eigen::MatrixXd& val_targets,
                         const MlpConfig& config = {});

/// Soft SVE estimate; no thresholding.
inline Eigen::MatrixXd predict_sve(Mlp& model, const Eigen::MatrixXd& features) {
  return model.predict(features);
}

/// Mean binary cross-entropy of probabilities against binary targets.
double binary_cross_entropy(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& targets);

}  // namespace aucap::sve
