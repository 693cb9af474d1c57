#include "aucap/nn/adam.hpp"

#include <cmath>

#include "aucap/error.hpp"

namespace aucap::nn {

Adam::Adam(std::vector<Parameter*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (const Parameter* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  bool any = false;
  for (const Parameter* p : params_) any = any || p->has_grad;
  if (!any) throw Error(Errc::invalid_argument, "Adam step before backward: no gradients");

  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * p.grad;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= config_.learning_rate * (m_[i].array() / c1) /
                       ((v_[i].array() / c2).sqrt() + config_.epsilon);
    p.zero_grad();
  }
}

}  // namespace aucap::nn
