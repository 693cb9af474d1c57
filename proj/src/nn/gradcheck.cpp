#include "aucap/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aucap/random.hpp"

namespace aucap::nn {

namespace {

double evaluate(const std::function<Var(Graph&)>& loss) {
  Graph g;
  return loss(g).value()(0, 0);
}

}  // namespace

GradCheckResult check_gradients(const std::function<Var(Graph&)>& loss,
                                std::span<Parameter* const> params,
                                const GradCheckConfig& config) {
  for (Parameter* p : params) p->zero_grad();
  {
    Graph g;
    g.backward(loss(g));
  }

  Rng rng(config.seed);
  GradCheckResult result;
  for (Parameter* p : params) {
    const Matrix analytic = p->grad;
    std::vector<Eigen::Index> entries(static_cast<std::size_t>(p->value.size()));
    std::iota(entries.begin(), entries.end(), Eigen::Index{0});
    if (config.max_entries > 0 && entries.size() > static_cast<std::size_t>(config.max_entries)) {
      shuffle(entries, rng);
      entries.resize(static_cast<std::size_t>(config.max_entries));
    }
    for (Eigen::Index flat : entries) {
      const Eigen::Index r = flat % p->value.rows();
      const Eigen::Index c = flat / p->value.rows();
      const double saved = p->value(r, c);
      const double a = analytic(r, c);
      double rel = std::numeric_limits<double>::infinity();
      for (double delta : config.deltas) {
        p->value(r, c) = saved + delta;
        const double up = evaluate(loss);
        p->value(r, c) = saved - delta;
        const double down = evaluate(loss);
        p->value(r, c) = saved;
        const double numeric = (up - down) / (2.0 * delta);
        const double denom = std::max({std::abs(a), std::abs(numeric), config.floor});
        rel = std::min(rel, std::abs(a - numeric) / denom);
      }
      ++result.checked;
      if (rel >= result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst = p->name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
      }
    }
    p->zero_grad();
  }
  return result;
}

}  // namespace aucap::nn
