#pragma once

// Parameterized layers built from graph ops. Every layer owns its
// Parameters and exposes them through parameters() for optimizers and
// checkpoints.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "aucap/nn/functional.hpp"
#include "aucap/nn/graph.hpp"
#include "aucap/random.hpp"

namespace aucap::nn {

class Dense {
 public:
  Dense() = default;
  /// Glorot-uniform weight (out x in), zero bias.
  Dense(std::string name, Eigen::Index in, Eigen::Index out, Rng& rng);

  Var forward(Graph& g, Var x);

  Eigen::Index in_dim() const { return weight.value.cols(); }
  Eigen::Index out_dim() const { return weight.value.rows(); }
  std::vector<Parameter*> parameters() { return {&weight, &bias}; }

  Parameter weight;
  Parameter bias;
};

/// GRU cell. Gate matrices are hidden x (hidden + input) over [h, x]; the
/// recurrent block is orthogonal-initialized, the input block Glorot-uniform.
class GruCell {
 public:
  GruCell() = default;
  GruCell(std::string name, Eigen::Index input, Eigen::Index hidden, Rng& rng,
          bool use_bias = true);

  Var step(Graph& g, Var x, Var h_prev);

  Eigen::Index hidden() const { return w_update.value.rows(); }
  Eigen::Index input() const { return w_update.value.cols() - hidden(); }
  bool use_bias() const { return use_bias_; }

  GruWeights<double> weights() const;
  void set_weights(const GruWeights<double>& w);

  std::vector<Parameter*> parameters();

  Parameter w_update, w_reset, w_candidate;
  Parameter b_update, b_reset, b_candidate;

 private:
  bool use_bias_ = true;
};

/// Runs the cell over seq (one B x d Var per time step) from h0 = 0. With
/// masks, step t only updates rows whose mask entry is 1 (left-padded
/// sequences). Returns every hidden state.
std::vector<Var> gru_forward(Graph& g, GruCell& cell, std::span<const Var> seq,
                             std::span<const Eigen::VectorXd> masks = {});

/// Forward pass plus a pass over the time-reversed sequence whose outputs are
/// re-reversed; per step the two states are concatenated (B x 2h).
struct BiGruOutput {
  std::vector<Var> sequence;
  Var final_state;  // [forward last, backward last] = B x 2h
};
BiGruOutput bigru_forward(Graph& g, GruCell& forward_cell, GruCell& backward_cell,
                          std::span<const Var> seq);

class BatchNorm {
 public:
  BatchNorm() = default;
  BatchNorm(std::string name, Eigen::Index dim, double momentum = 0.99, double eps = 1e-5);

  /// Train mode normalizes by batch statistics and moves the running
  /// averages; infer mode uses the running averages. The averages are
  /// zero-debiased, so the initial (0, 1) statistics leave no residue once
  /// a single batch has been seen.
  Var forward(Graph& g, Var x, Mode mode);
  /// Normalizes all time steps jointly (statistics over batch and time).
  std::vector<Var> forward_sequence(Graph& g, std::span<const Var> seq, Mode mode);

  Eigen::Index dim() const { return gamma.value.cols(); }
  std::vector<Parameter*> parameters() { return {&gamma, &beta}; }

  Parameter gamma;
  Parameter beta;
  Eigen::RowVectorXd running_mean;
  Eigen::RowVectorXd running_var;
  double momentum = 0.99;
  double eps = 1e-5;

 private:
  Eigen::RowVectorXd mean_acc_;
  Eigen::RowVectorXd var_acc_;
  double decay_ = 1.0;  // momentum^updates
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(std::string name, Eigen::Index vocab, Eigen::Index dim, Rng& rng);

  Var forward(Graph& g, std::span<const std::int32_t> indices);
  std::vector<Parameter*> parameters() { return {&table}; }

  Parameter table;
};

/// Train mode: zero each unit with probability rate and scale survivors by
/// 1 / (1 - rate). Infer mode or rate 0: identity.
Var dropout(Var x, double rate, Mode mode, Rng& rng);
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

}  // namespace aucap::nn
