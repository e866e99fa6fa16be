#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sag/errors.hpp"

namespace sag {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

/// Dense float64 array in row-major order, optionally participating in
/// reverse-mode gradient computation.
class Tensor {
 public:
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;  // same size as values once touched by backward
  bool requires_grad = false;
  std::string name;  // used in optimizer diagnostics

  static TensorPtr zeros(std::vector<std::size_t> shape,
                         bool requires_grad = false);
  static TensorPtr from(std::vector<std::size_t> shape,
                        std::vector<double> values,
                        bool requires_grad = false);
  static TensorPtr scalar(double v, bool requires_grad = false);
  static TensorPtr vector(std::vector<double> values,
                          bool requires_grad = false);

  std::size_t size() const { return values.size(); }
  bool is_scalar() const { return values.size() == 1; }
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  void ensure_grad();
  void zero_grad();

  std::string shape_str() const;
};

/// Records the backward rules of forward ops in execution order; backward()
/// replays them in reverse.
class Tape {
 public:
  void record(std::function<void()> backward_fn) {
    ops_.push_back(std::move(backward_fn));
  }

  /// Seeds grad(loss)=1 and replays all recorded rules in reverse order.
  /// Gradients accumulate additively into every requires_grad tensor.
  void backward(const TensorPtr& loss);

  void clear() { ops_.clear(); }
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<std::function<void()>> ops_;
};

enum class Elementwise { add, sub, mul, abs_diff };
enum class Activation { sigmoid, tanh };

/// a[m×n] * b[n×p] -> [m×p]. A 1-D first argument [n] is treated as a row
/// vector, yielding a 1-D result [p].
TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b);

TensorPtr elementwise(Tape& tape, Elementwise op, const TensorPtr& a,
                      const TensorPtr& b);
inline TensorPtr add(Tape& t, const TensorPtr& a, const TensorPtr& b) {
  return elementwise(t, Elementwise::add, a, b);
}
inline TensorPtr sub(Tape& t, const TensorPtr& a, const TensorPtr& b) {
  return elementwise(t, Elementwise::sub, a, b);
}
inline TensorPtr mul(Tape& t, const TensorPtr& a, const TensorPtr& b) {
  return elementwise(t, Elementwise::mul, a, b);
}
inline TensorPtr abs_diff(Tape& t, const TensorPtr& a, const TensorPtr& b) {
  return elementwise(t, Elementwise::abs_diff, a, b);
}

TensorPtr activation(Tape& tape, Activation kind, const TensorPtr& x);
inline TensorPtr sigmoid(Tape& t, const TensorPtr& x) {
  return activation(t, Activation::sigmoid, x);
}
inline TensorPtr tanh_of(Tape& t, const TensorPtr& x) {
  return activation(t, Activation::tanh, x);
}

/// Numerically stable softmax over a 1-D tensor.
TensorPtr softmax(Tape& tape, const TensorPtr& x);

/// Concatenates 1-D tensors end to end.
TensorPtr concat(Tape& tape, const std::vector<TensorPtr>& parts);

/// Stacks equal-length 1-D tensors into an [n×d] matrix.
TensorPtr stack_rows(Tape& tape, const std::vector<TensorPtr>& rows);

/// Differentiable row slice of a 2-D tensor.
TensorPtr row(Tape& tape, const TensorPtr& m, std::size_t r);

/// Per-dimension max over rows t < valid_len of h[T×d]; rows at or beyond
/// valid_len are padding and never influence the result. Backward routes to
/// the argmax row only, first occurrence on ties.
TensorPtr max_over_time(Tape& tape, const TensorPtr& h, std::size_t valid_len);

/// Sum of all elements, as a scalar.
TensorPtr sum(Tape& tape, const TensorPtr& x);

/// Mean over the batch of -log p(label), probs[B×c] rows being
/// distributions. Probabilities are clamped at 1e-12 before the log.
TensorPtr cross_entropy(Tape& tape, const TensorPtr& probs,
                        const std::vector<int>& labels);

// Batched variants. Row b of each output equals the corresponding 1-D op
// applied to row b of the inputs, with identical summation order, so the
// batched path is bit-identical to the per-sample path.

/// m[B×d] + broadcast of bias[d] over rows.
TensorPtr add_rowwise(Tape& tape, const TensorPtr& m, const TensorPtr& bias);

/// Concatenates [B×d_i] matrices along columns into [B×Σd_i].
TensorPtr concat_cols(Tape& tape, const std::vector<TensorPtr>& parts);

/// Row-wise softmax of a 2-D tensor.
TensorPtr softmax_rows(Tape& tape, const TensorPtr& m);

/// steps[t] is [B×d]; out[b][j] = max over t < valid_lens[b] of
/// steps[t][b][j], first occurrence on ties.
TensorPtr max_over_steps(Tape& tape, const std::vector<TensorPtr>& steps,
                         const std::vector<std::size_t>& valid_lens);

}  // namespace sag
