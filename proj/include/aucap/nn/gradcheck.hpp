#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aucap/nn/graph.hpp"

namespace aucap::nn {

struct GradCheckConfig {
  /// Each entry is probed with every step and scored by the closest
  /// estimate: a large step is swamped less by rounding on tiny gradients, a
  /// small one is less likely to straddle a ReLU kink.
  std::vector<double> deltas = {1e-5, 1e-6};
  /// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  /// Entries sampled per tensor; 0 checks every entry.
  int max_entries = 0;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<param>[r,c]"
  std::size_t checked = 0;
};

/// Compares backward() against central differences. loss must rebuild the
/// same scalar from scratch on every call (fixed dropout masks, fixed
/// inputs).
GradCheckResult check_gradients(const std::function<Var(Graph&)>& loss,
                                std::span<Parameter* const> params,
                                const GradCheckConfig& config = {});

}  // namespace aucap::nn
