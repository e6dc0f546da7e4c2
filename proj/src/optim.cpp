#include "factedit/optim.hpp"

#include <cmath>

namespace factedit {

void Optimizer::step(const std::vector<TensorPtr>& params) {
  for (const auto& p : params) {
    if (p->frozen)
      throw TensorError("optimizer_step: parameter '" + p->name + "' is frozen");
    if (!p->has_grad())
      throw TensorError("optimizer_step: parameter '" + p->name + "' has no gradient");
  }
  ++step_count_;
  if (method_ == OptMethod::SGD) {
    for (const auto& p : params)
      for (std::size_t i = 0; i < p->size(); ++i) p->values[i] -= lr_ * p->grad[i];
  } else {
    if (m_.size() < params.size()) {
      m_.resize(params.size());
      v_.resize(params.size());
    }
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto& p = *params[k];
      if (m_[k].size() != p.size()) {
        m_[k].assign(p.size(), 0.0);
        v_[k].assign(p.size(), 0.0);
      }
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double g = p.grad[i];
        m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g;
        v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g * g;
        const double mhat = m_[k][i] / bc1;
        const double vhat = v_[k][i] / bc2;
        p.values[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }
  for (const auto& p : params) p->zero_grad();
}

}  // namespace factedit
