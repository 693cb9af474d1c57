#pragma once

// Finite-difference checks over every differentiable building block on
// small randomized shapes.

#include <cstdint>
#include <string>
#include <vector>

#include "aucap/nn/gradcheck.hpp"

namespace aucap {

struct SuiteEntry {
  std::string layer;
  nn::GradCheckResult result;
  double seconds = 0.0;
};

/// Layers: dense, activations, gru_cell, bigru, embedding, batch_norm,
/// mlp, captioner.
std::vector<SuiteEntry> run_gradient_suite(std::uint64_t seed = 1,
                                           const nn::GradCheckConfig& config = {});

}  // namespace aucap
