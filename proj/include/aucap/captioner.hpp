#pragma once

// GRU encoder-decoder captioner. The audio branch (BiGRU -> BiGRU) and the
// text branch (embedding -> GRU over the partial caption) are fused by
// concatenation; a one-step GRU decoder predicts the next word.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aucap/audio_features.hpp"
#include "aucap/nn/checkpoint.hpp"
#include "aucap/nn/layers.hpp"

namespace aucap::captioner {

using nn::Matrix;

/// PANNs: one row [embedding, sve]. Log-Mel and VGGish: sve tiled onto
/// every frame. sve may be null (no-SVE ablation). Errc::dimension_mismatch
/// when the audio width does not match the variant.
Matrix build_encoder_input(const Matrix& audio, const Eigen::VectorXd* sve,
                           audio::FeatureVariant variant);

struct CaptionerConfig {
  audio::FeatureVariant variant = audio::FeatureVariant::logmel;
  Eigen::Index input_dim = 64;  // audio width plus SVE length
  Eigen::Index sve_dim = 0;     // 0 for the ablation
  Eigen::Index vocab_size = 0;
  Eigen::Index embed_dim = 256;
  Eigen::Index audio_gru1 = 32;
  Eigen::Index audio_gru2 = 64;
  Eigen::Index text_gru = 128;
  Eigen::Index decoder_gru = 128;
  double dropout = 0.5;
  double leaky_alpha = 0.3;
  int max_len = 22;

  Eigen::Index fused_dim() const { return 2 * audio_gru2 + text_gru; }
  std::string to_json() const;
  static CaptionerConfig from_json(const std::string& text);
};

class Captioner {
 public:
  Captioner() = default;
  /// word_vectors (vocab_size x embed_dim) initializes the embedding table.
  Captioner(const CaptionerConfig& config, Rng& rng, const Matrix* word_vectors = nullptr);

  const CaptionerConfig& config() const { return config_; }

  /// B x 2*audio_gru2 from B encoder inputs of equal length.
  nn::Var encode_audio(nn::Graph& g, std::span<const Matrix* const> inputs, nn::Mode mode,
                       Rng& rng);
  /// B x text_gru from left-padded prefixes (each starting with <sos>).
  nn::Var encode_text(nn::Graph& g, std::span<const std::vector<std::int32_t>> prefixes,
                      nn::Mode mode, Rng& rng);
  /// Next-word probabilities (B x V) from the two encodings.
  nn::Var decode_step(nn::Graph& g, nn::Var audio_code, nn::Var text_code, nn::Mode mode);

  nn::Var forward(nn::Graph& g, std::span<const Matrix* const> inputs,
                  std::span<const std::vector<std::int32_t>> prefixes, nn::Mode mode, Rng& rng);

  /// Argmax decoding from <sos> until <eos> or max_len tokens; ties go to
  /// the lowest index. The returned sequence includes <sos>.
  std::vector<std::int32_t> greedy_decode(const Matrix& input, int max_len = 0);

  std::vector<nn::Parameter*> parameters();
  std::vector<nn::BatchNorm*> batch_norms();

  nn::TensorStore to_store(std::uint64_t vocab_hash, std::uint64_t corpus_hash) const;
  /// Rejects stores whose hashes differ from the expected ones
  /// (Errc::hash_mismatch) unless the expectation is absent.
  static Captioner from_store(const nn::TensorStore& store,
                              std::optional<std::uint64_t> vocab_hash,
                              std::optional<std::uint64_t> corpus_hash);

  nn::GruCell audio1_fwd, audio1_bwd, audio2_fwd, audio2_bwd;
  nn::BatchNorm audio1_bn, audio2_bn;
  nn::Embedding embedding;
  nn::GruCell text_gru;
  nn::BatchNorm text_bn;
  nn::GruCell decoder_gru;
  nn::BatchNorm decoder_bn;
  nn::Dense output;

 private:
  CaptionerConfig config_;
};

/// One (clip, caption) pair. input is the encoder input matrix.
struct Instance {
  const Matrix* input = nullptr;
  std::vector<std::int32_t> tokens;  // <sos> ... <eos>
};

/// A caption of N tokens yields N - 1 examples: tokens[0, len) -> tokens[len].
struct Example {
  std::size_t instance = 0;
  std::size_t prefix_len = 0;
};
std::vector<Example> expand_prefixes(std::span<const Instance> instances);

struct TrainConfig {
  int epochs = 50;
  int batch = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  /// Called after every epoch with (epoch, train loss, validation loss or NaN).
  std::function<void(int, double, double)> on_epoch;
};

struct TrainResult {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  int best_epoch = 0;
};

/// Teacher-forced cross-entropy training with Adam. Keeps the parameters of
/// the lowest validation loss when validation instances are given, else the
/// final ones.
TrainResult train(Captioner& model, std::span<const Instance> train_set,
                  std::span<const Instance> validation_set, const TrainConfig& config);

/// Infer-mode mean cross-entropy over all prefix examples.
double evaluate_loss(Captioner& model, std::span<const Instance> instances, int batch = 64);

}  // namespace aucap::captioner
