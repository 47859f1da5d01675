#include "fct/numerics/adam.hpp"

#include <cmath>

#include "fct/error.hpp"

namespace fct {

void AdamState::step(const std::vector<ParamRef>& params) {
  if (m_.empty() && step_ == 0) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
  }
  if (params.size() != m_.size()) throw ShapeError("adam: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i].value, m_[i], "adam parameter");
    require_same_shape(*params[i].grad, m_[i], "adam gradient");
    require_finite(*params[i].grad, "adam gradient");
  }

  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& value = *params[i].value;
    Matrix g = *params[i].grad;
    if (config_.weight_decay != 0.0) g += config_.weight_decay * value;
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseAbs2();
    const auto m_hat = m_[i].array() / bc1;
    const auto v_hat = v_[i].array() / bc2;
    value.array() -= config_.lr * m_hat / (v_hat.sqrt() + config_.eps);
  }
}

}  // namespace fct
