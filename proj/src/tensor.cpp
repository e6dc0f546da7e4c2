#include "factedit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace factedit {

namespace {

std::string shape_str(const std::vector<std::size_t>& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

[[noreturn]] void shape_fail(const std::string& op, const Tensor& a, const Tensor& b) {
  throw ShapeError("op '" + op + "': incompatible shapes " + shape_str(a.shape) +
                   " and " + shape_str(b.shape));
}

std::size_t shape_product(const std::vector<std::size_t>& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

bool any_grad(const std::vector<TensorPtr>& ts) {
  for (const auto& t : ts)
    if (t->requires_grad || t->backward_fn) return true;
  return false;
}

// Attach graph edges only when some input participates in autodiff.
void record(const TensorPtr& out, std::vector<TensorPtr> parents,
            std::function<void(Tensor&)> fn) {
  if (!any_grad(parents)) return;
  out->requires_grad = true;
  out->parents = std::move(parents);
  out->backward_fn = std::move(fn);
}

void accum(Tensor& t, std::size_t i, double g) {
  t.ensure_grad();
  t.grad[i] += g;
}

}  // namespace

TensorPtr make_tensor(std::vector<std::size_t> shape, std::vector<double> values,
                      bool requires_grad) {
  if (shape_product(shape) != values.size())
    throw ShapeError("make_tensor: shape " + shape_str(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->values = std::move(values);
  t->requires_grad = requires_grad;
  return t;
}

TensorPtr scalar_tensor(double v, bool requires_grad) {
  return make_tensor({1}, {v}, requires_grad);
}

TensorPtr zeros(std::vector<std::size_t> shape, bool requires_grad) {
  std::vector<double> v(shape_product(shape), 0.0);
  return make_tensor(std::move(shape), std::move(v), requires_grad);
}

TensorPtr full(std::vector<std::size_t> shape, double x, bool requires_grad) {
  std::vector<double> v(shape_product(shape), x);
  return make_tensor(std::move(shape), std::move(v), requires_grad);
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
  if (a->shape != b->shape) shape_fail("add", *a, *b);
  auto out = zeros(a->shape);
  for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] + b->values[i];
  record(out, {a, b}, [a, b](Tensor& o) {
    for (std::size_t i = 0; i < o.size(); ++i) {
      if (a->requires_grad) accum(*a, i, o.grad[i]);
      if (b->requires_grad) accum(*b, i, o.grad[i]);
    }
  });
  return out;
}

TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
  if (a->shape != b->shape) shape_fail("sub", *a, *b);
  auto out = zeros(a->shape);
  for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] - b->values[i];
  record(out, {a, b}, [a, b](Tensor& o) {
    for (std::size_t i = 0; i < o.size(); ++i) {
      if (a->requires_grad) accum(*a, i, o.grad[i]);
      if (b->requires_grad) accum(*b, i, -o.grad[i]);
    }
  });
  return out;
}

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
  if (a->shape != b->shape) shape_fail("mul", *a, *b);
  auto out = zeros(a->shape);
  for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] * b->values[i];
  record(out, {a, b}, [a, b](Tensor& o) {
    for (std::size_t i = 0; i < o.size(); ++i) {
      if (a->requires_grad) accum(*a, i, o.grad[i] * b->values[i]);
      if (b->requires_grad) accum(*b, i, o.grad[i] * a->values[i]);
    }
  });
  return out;
}

TensorPtr scale(const TensorPtr& a, double c) {
  auto out = zeros(a->shape);
  for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] * c;
  record(out, {a}, [a, c](Tensor& o) {
    for (std::size_t i = 0; i < o.size(); ++i) accum(*a, i, o.grad[i] * c);
  });
  return out;
}

TensorPtr add_const(const TensorPtr& a, double c) {
  auto out = zeros(a->shape);
  for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = a->values[i] + c;
  record(out, {a}, [a](Tensor& o) {
    for (std::size_t i = 0; i < o.size(); ++i) accum(*a, i, o.grad[i]);
  });
  return out;
}

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
  if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[0])
    shape_fail("matmul", *a, *b);
  const std::size_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
  auto out = zeros({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a->values[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &b->values[p * n];
      double* orow = &out->values[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  record(out, {a, b}, [a, b, m, k, n](Tensor& o) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double g = o.grad[i * n + j];
          if (g == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p)
            a->grad[i * k + p] += g * b->values[p * n + j];
        }
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double av = a->values[i * k + p];
          if (av == 0.0) continue;
          const double* grow = &o.grad[i * n];
          double* brow = &b->grad[p * n];
          for (std::size_t j = 0; j < n; ++j) brow[j] += av * grow[j];
        }
    }
  });
  return out;
}

TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b) {
  if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[1])
    shape_fail("matmul_nt", *a, *b);
  const std::size_t m = a->shape[0], k = a->shape[1], n = b->shape[0];
  auto out = zeros({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      const double* arow = &a->values[i * k];
      const double* brow = &b->values[j * k];
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      out->values[i * n + j] = s;
    }
  record(out, {a, b}, [a, b, m, k, n](Tensor& o) {
    if (a->requires_grad) a->ensure_grad();
    if (b->requires_grad) b->ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double g = o.grad[i * n + j];
        if (g == 0.0) continue;
        for (std::size_t p = 0; p < k; ++p) {
          if (a->requires_grad) a->grad[i * k + p] += g * b->values[j * k + p];
          if (b->requires_grad) b->grad[j * k + p] += g * a->values[i * k + p];
        }
      }
  });
  return out;
}

TensorPtr transpose(const TensorPtr& a) {
  const std::size_t m = a->rows(), n = a->cols();
  auto out = zeros({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out->values[j * m + i] = a->values[i * n + j];
  record(out, {a}, [a, m, n](Tensor& o) {
    a->ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) a->grad[i * n + j] += o.grad[j * m + i];
  });
  return out;
}

TensorPtr sigmoid(const TensorPtr& a) {
  auto out = zeros(a->shape);
  for (std::size_t i = 0; i < a->size(); ++i)
    out->values[i] = 1.0 / (1.0 + std::exp(-a->values[i]));
  auto op = out;
  record(out, {a}, [a, wp = std::weak_ptr<Tensor>(op)](Tensor& o) {
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double s = o.values[i];
      accum(*a, i, o.grad[i] * s * (1.0 - s));
    }
  });
  return out;
}

TensorPtr tanh_t(const TensorPtr& a) {
  auto out = zeros(a->shape);
  for (std::size_t i = 0; i < a->size(); ++i) out->values[i] = std::tanh(a->values[i]);
  record(out, {a}, [a](Tensor& o) {
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double t = o.values[i];
      accum(*a, i, o.grad[i] * (1.0 - t * t));
    }
  });
  return out;
}

TensorPtr log_t(const TensorPtr& a) {
  auto out = zeros(a->shape);
  for (std::size_t i = 0; i < a->size(); ++i) {
    if (a->values[i] <= 0.0)
      throw TensorError("log: non-positive input " + std::to_string(a->values[i]));
    out->values[i] = std::log(a->values[i]);
  }
  record(out, {a}, [a](Tensor& o) {
    for (std::size_t i = 0; i < o.size(); ++i) accum(*a, i, o.grad[i] / a->values[i]);
  });
  return out;
}

TensorPtr softmax_rows(const TensorPtr& a) {
  const std::size_t m = a->rows(), n = a->cols();
  if (n == 0 || m == 0) throw ShapeError("softmax: empty input");
  auto out = zeros(a->shape);
  for (std::size_t i = 0; i < m; ++i) {
    const double* xr = &a->values[i * n];
    double mx = xr[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xr[j]);
    double z = 0.0;
    double* orow = &out->values[i * n];
    for (std::size_t j = 0; j < n; ++j) {
      orow[j] = std::exp(xr[j] - mx);
      z += orow[j];
    }
    for (std::size_t j = 0; j < n; ++j) orow[j] /= z;
  }
  record(out, {a}, [a, m, n](Tensor& o) {
    a->ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      const double* p = &o.values[i * n];
      const double* g = &o.grad[i * n];
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += p[j] * g[j];
      for (std::size_t j = 0; j < n; ++j) a->grad[i * n + j] += p[j] * (g[j] - dot);
    }
  });
  return out;
}

TensorPtr sum(const TensorPtr& a) {
  double s = 0.0;
  for (double v : a->values) s += v;
  auto out = scalar_tensor(s);
  record(out, {a}, [a](Tensor& o) {
    for (std::size_t i = 0; i < a->size(); ++i) accum(*a, i, o.grad[0]);
  });
  return out;
}

TensorPtr mean(const TensorPtr& a) {
  if (a->size() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a->size()));
}

TensorPtr sum_cols(const TensorPtr& a) {
  const std::size_t m = a->rows(), n = a->cols();
  auto out = zeros({1, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out->values[j] += a->at(i, j);
  record(out, {a}, [a, m, n](Tensor& o) {
    a->ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) a->grad[i * n + j] += o.grad[j];
  });
  return out;
}

TensorPtr mean_cols(const TensorPtr& a) {
  if (a->rows() == 0) throw ShapeError("mean_cols: empty tensor");
  return scale(sum_cols(a), 1.0 / static_cast<double>(a->rows()));
}

TensorPtr max_cols(const TensorPtr& a) {
  const std::size_t m = a->rows(), n = a->cols();
  if (m == 0) throw ShapeError("max_cols: empty tensor");
  auto out = zeros({1, n});
  auto argmax = std::make_shared<std::vector<std::size_t>>(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    double best = a->at(0, j);
    for (std::size_t i = 1; i < m; ++i)
      if (a->at(i, j) > best) {
        best = a->at(i, j);
        (*argmax)[j] = i;
      }
    out->values[j] = best;
  }
  record(out, {a}, [a, argmax, n](Tensor& o) {
    a->ensure_grad();
    for (std::size_t j = 0; j < n; ++j) a->grad[(*argmax)[j] * n + j] += o.grad[j];
  });
  return out;
}

TensorPtr concat_rows(const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const std::size_t n = parts[0]->cols();
  std::size_t m = 0;
  for (const auto& p : parts) {
    if (p->cols() != n) shape_fail("concat_rows", *parts[0], *p);
    m += p->rows();
  }
  auto out = zeros({m, n});
  std::size_t r = 0;
  for (const auto& p : parts) {
    std::copy(p->values.begin(), p->values.end(), out->values.begin() + r * n);
    r += p->rows();
  }
  record(out, parts, [parts, n](Tensor& o) {
    std::size_t r = 0;
    for (const auto& p : parts) {
      if (p->requires_grad) {
        p->ensure_grad();
        for (std::size_t i = 0; i < p->size(); ++i) p->grad[i] += o.grad[r * n + i];
      }
      r += p->rows();
    }
  });
  return out;
}

TensorPtr concat_cols(const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const std::size_t m = parts[0]->rows();
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p->rows() != m) shape_fail("concat_cols", *parts[0], *p);
    n += p->cols();
  }
  auto out = zeros({m, n});
  std::size_t c = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < p->cols(); ++j) out->at(i, c + j) = p->at(i, j);
    c += p->cols();
  }
  record(out, parts, [parts, m, n](Tensor& o) {
    std::size_t c = 0;
    for (const auto& p : parts) {
      if (p->requires_grad) {
        p->ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < p->cols(); ++j)
            p->grad[i * p->cols() + j] += o.grad[i * n + c + j];
      }
      c += p->cols();
    }
  });
  return out;
}

TensorPtr stack_rows(const std::vector<TensorPtr>& rows_) { return concat_rows(rows_); }

TensorPtr slice_rows(const TensorPtr& a, std::size_t r0, std::size_t r1) {
  if (r1 > a->rows() || r0 > r1) throw ShapeError("slice_rows: range out of bounds");
  const std::size_t n = a->cols();
  auto out = zeros({r1 - r0, n});
  std::copy(a->values.begin() + r0 * n, a->values.begin() + r1 * n, out->values.begin());
  record(out, {a}, [a, r0, n](Tensor& o) {
    a->ensure_grad();
    for (std::size_t i = 0; i < o.size(); ++i) a->grad[r0 * n + i] += o.grad[i];
  });
  return out;
}

TensorPtr slice_cols(const TensorPtr& a, std::size_t c0, std::size_t c1) {
  if (c1 > a->cols() || c0 > c1) throw ShapeError("slice_cols: range out of bounds");
  const std::size_t m = a->rows(), n = a->cols(), w = c1 - c0;
  auto out = zeros({m, w});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out->at(i, j) = a->at(i, c0 + j);
  record(out, {a}, [a, c0, m, n, w](Tensor& o) {
    a->ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) a->grad[i * n + c0 + j] += o.grad[i * w + j];
  });
  return out;
}

TensorPtr row(const TensorPtr& a, std::size_t r) { return slice_rows(a, r, r + 1); }

TensorPtr pick(const TensorPtr& a, std::size_t flat_index) {
  if (flat_index >= a->size()) throw ShapeError("pick: index out of bounds");
  auto out = scalar_tensor(a->values[flat_index]);
  record(out, {a}, [a, flat_index](Tensor& o) { accum(*a, flat_index, o.grad[0]); });
  return out;
}

TensorPtr gather_rows(const TensorPtr& table, std::span<const int> ids) {
  const std::size_t n = table->cols();
  auto out = zeros({ids.size(), n});
  std::vector<int> idv(ids.begin(), ids.end());
  for (std::size_t i = 0; i < idv.size(); ++i) {
    if (idv[i] < 0 || static_cast<std::size_t>(idv[i]) >= table->rows())
      throw TensorError("gather_rows: id " + std::to_string(idv[i]) + " out of range");
    std::copy(table->values.begin() + idv[i] * n, table->values.begin() + (idv[i] + 1) * n,
              out->values.begin() + i * n);
  }
  record(out, {table}, [table, idv, n](Tensor& o) {
    table->ensure_grad();
    for (std::size_t i = 0; i < idv.size(); ++i)
      for (std::size_t j = 0; j < n; ++j)
        table->grad[idv[i] * n + j] += o.grad[i * n + j];
  });
  return out;
}

TensorPtr forward_op(const std::string& name, const std::vector<TensorPtr>& in,
                     std::size_t i0, std::size_t i1) {
  auto need = [&](std::size_t k) {
    if (in.size() != k)
      throw TensorError("op '" + name + "': expected " + std::to_string(k) + " inputs, got " +
                        std::to_string(in.size()));
  };
  if (name == "matmul") { need(2); return matmul(in[0], in[1]); }
  if (name == "add") { need(2); return add(in[0], in[1]); }
  if (name == "mul") { need(2); return mul(in[0], in[1]); }
  if (name == "concat") return concat_rows(in);
  if (name == "sigmoid") { need(1); return sigmoid(in[0]); }
  if (name == "tanh") { need(1); return tanh_t(in[0]); }
  if (name == "softmax") { need(1); return softmax_rows(in[0]); }
  if (name == "log") { need(1); return log_t(in[0]); }
  if (name == "sum") { need(1); return sum(in[0]); }
  if (name == "mean") { need(1); return mean(in[0]); }
  if (name == "slice") { need(1); return slice_rows(in[0], i0, i1); }
  if (name == "stack") return stack_rows(in);
  throw TensorError("unknown op '" + name + "'");
}

void Tape::backward(const TensorPtr& loss) {
  if (!loss->is_scalar())
    throw TensorError("backward: loss must be scalar, got size " +
                      std::to_string(loss->size()));
  // Topological order via iterative DFS over recorded parents.
  std::vector<TensorPtr> order;
  std::unordered_set<Tensor*> seen;
  std::vector<std::pair<TensorPtr, std::size_t>> stack{{loss, 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      auto child = node->parents[next++];
      if (seen.insert(child.get()).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss->ensure_grad();
  loss->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& t = **it;
    if (t.backward_fn && t.has_grad()) t.backward_fn(t);
  }
  // Clear the tape: drop graph edges, keep values and grads.
  for (auto& t : order) {
    t->parents.clear();
    t->backward_fn = nullptr;
  }
}

void glorot_init(Tensor& t, std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(t.rows());
  const double fan_out = static_cast<double>(t.cols());
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& v : t.values) v = dist(rng);
}

void normal_init(Tensor& t, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.values) v = dist(rng);
}

}  // namespace factedit
