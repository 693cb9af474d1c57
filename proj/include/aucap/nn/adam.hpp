#pragma once

#include <vector>

#include "aucap/nn/graph.hpp"

namespace aucap::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. step() consumes the accumulated gradients and
/// zeroes them.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config = {});

  /// Errc::invalid_argument when no parameter received a gradient since the
  /// last step.
  void step();

  long steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long steps_ = 0;
};

}  // namespace aucap::nn
