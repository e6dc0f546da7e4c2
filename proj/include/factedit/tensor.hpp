#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace factedit {

class TensorError : public std::runtime_error {
 public:
  explicit TensorError(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeError : public TensorError {
 public:
  using TensorError::TensorError;
};

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense row-major tensor of rank 1 or 2, 64-bit values. Ops build the
// backward graph through `parents`/`backward_fn` whenever an input
// requires grad; Tape::backward runs the reverse sweep and clears it.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  bool requires_grad = false;
  std::vector<double> grad;  // empty until touched by backward
  std::string name;          // set for trainable parameters
  bool frozen = false;

  std::vector<TensorPtr> parents;
  std::function<void(Tensor&)> backward_fn;

  std::size_t size() const { return values.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  bool is_scalar() const { return values.size() == 1; }
  double scalar() const {
    if (!is_scalar()) throw TensorError("scalar() on non-scalar tensor");
    return values[0];
  }

  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
  void zero_grad() { grad.assign(values.size(), 0.0); }
  bool has_grad() const { return grad.size() == values.size(); }
};

TensorPtr make_tensor(std::vector<std::size_t> shape, std::vector<double> values,
                      bool requires_grad = false);
TensorPtr scalar_tensor(double v, bool requires_grad = false);
TensorPtr zeros(std::vector<std::size_t> shape, bool requires_grad = false);
TensorPtr full(std::vector<std::size_t> shape, double v, bool requires_grad = false);

// ---- forward ops ------------------------------------------------------

TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(const TensorPtr& a, const TensorPtr& b);  // elementwise
TensorPtr scale(const TensorPtr& a, double c);
TensorPtr add_const(const TensorPtr& a, double c);
TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b);  // a * b^T
TensorPtr transpose(const TensorPtr& a);
TensorPtr sigmoid(const TensorPtr& a);
TensorPtr tanh_t(const TensorPtr& a);
TensorPtr log_t(const TensorPtr& a);  // requires strictly positive input
TensorPtr softmax_rows(const TensorPtr& a);
TensorPtr sum(const TensorPtr& a);
TensorPtr mean(const TensorPtr& a);
TensorPtr sum_cols(const TensorPtr& a);   // [m x n] -> [1 x n]
TensorPtr mean_cols(const TensorPtr& a);  // [m x n] -> [1 x n]
TensorPtr max_cols(const TensorPtr& a);   // [m x n] -> [1 x n]
TensorPtr concat_rows(const std::vector<TensorPtr>& parts);
TensorPtr concat_cols(const std::vector<TensorPtr>& parts);
TensorPtr stack_rows(const std::vector<TensorPtr>& rows);  // each [1 x n]
TensorPtr slice_rows(const TensorPtr& a, std::size_t r0, std::size_t r1);
TensorPtr slice_cols(const TensorPtr& a, std::size_t c0, std::size_t c1);
TensorPtr row(const TensorPtr& a, std::size_t r);
TensorPtr pick(const TensorPtr& a, std::size_t flat_index);  // scalar gather
TensorPtr gather_rows(const TensorPtr& table, std::span<const int> ids);

// Generic dispatcher over the named op set. `i0`/`i1` carry the slice
// range when name == "slice"; ignored otherwise.
TensorPtr forward_op(const std::string& name, const std::vector<TensorPtr>& inputs,
                     std::size_t i0 = 0, std::size_t i1 = 0);

// ---- reverse sweep ----------------------------------------------------

// Reverse-mode sweep over the graph reachable from a scalar loss. The
// tape is the topological order rebuilt from the recorded parents; it is
// released after the sweep so tensors can outlive their graph.
class Tape {
 public:
  static void backward(const TensorPtr& loss);
};

// ---- init helpers -----------------------------------------------------

void glorot_init(Tensor& t, std::mt19937_64& rng);
void normal_init(Tensor& t, double stddev, std::mt19937_64& rng);

}  // namespace factedit
