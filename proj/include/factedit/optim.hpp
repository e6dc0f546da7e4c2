#pragma once

#include <vector>

#include "factedit/tensor.hpp"

namespace factedit {

enum class OptMethod { SGD, ADAM };

// Holds per-parameter Adam moments keyed by position in the parameter
// list; the list order must be stable across steps.
class Optimizer {
 public:
  Optimizer(OptMethod method, double lr, double beta1 = 0.9, double beta2 = 0.999,
            double eps = 1e-8)
      : method_(method), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<TensorPtr>& params);
  long step_count() const { return step_count_; }
  double lr() const { return lr_; }

 private:
  OptMethod method_;
  double lr_, beta1_, beta2_, eps_;
  long step_count_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace factedit
