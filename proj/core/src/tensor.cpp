#include "sag/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sag {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

}  // namespace

TensorPtr Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  auto t = std::make_shared<Tensor>();
  t->values.assign(shape_product(shape), 0.0);
  t->shape = std::move(shape);
  t->requires_grad = requires_grad;
  return t;
}

TensorPtr Tensor::from(std::vector<std::size_t> shape,
                       std::vector<double> values, bool requires_grad) {
  if (shape_product(shape) != values.size()) {
    throw DimensionError("tensor value count does not match shape");
  }
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->values = std::move(values);
  t->requires_grad = requires_grad;
  return t;
}

TensorPtr Tensor::scalar(double v, bool requires_grad) {
  return from({1}, {v}, requires_grad);
}

TensorPtr Tensor::vector(std::vector<double> values, bool requires_grad) {
  std::size_t n = values.size();
  return from({n}, std::move(values), requires_grad);
}

std::size_t Tensor::rows() const {
  if (shape.size() != 2) throw DimensionError("rows() on non-2D tensor");
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (shape.size() != 2) throw DimensionError("cols() on non-2D tensor");
  return shape[1];
}

double& Tensor::at(std::size_t r, std::size_t c) {
  return values[r * cols() + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return values[r * shape[1] + c];
}

void Tensor::ensure_grad() {
  if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() { grad.assign(values.size(), 0.0); }

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

void Tape::backward(const TensorPtr& loss) {
  if (!loss->is_scalar()) {
    throw Error("backward requires a scalar loss, got shape " +
                loss->shape_str());
  }
  loss->ensure_grad();
  loss->grad[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

namespace {

bool any_grad(const TensorPtr& a, const TensorPtr& b) {
  return a->requires_grad || b->requires_grad;
}

}  // namespace

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
  const bool a_vec = a->shape.size() == 1;
  if (!a_vec && a->shape.size() != 2) {
    throw DimensionError("matmul: first argument must be 1-D or 2-D, got " +
                         a->shape_str());
  }
  if (b->shape.size() != 2) {
    throw DimensionError("matmul: second argument must be 2-D, got " +
                         b->shape_str());
  }
  const std::size_t m = a_vec ? 1 : a->shape[0];
  const std::size_t n = a_vec ? a->shape[0] : a->shape[1];
  const std::size_t p = b->shape[1];
  if (b->shape[0] != n) {
    throw DimensionError("matmul: inner dimensions disagree: " +
                         a->shape_str() + " vs " + b->shape_str());
  }

  auto out = a_vec ? Tensor::zeros({p}) : Tensor::zeros({m, p});
  const double* av = a->values.data();
  const double* bv = b->values.data();
  double* ov = out->values.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = av + i * n;
    double* orow = ov + i * p;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = arow[k];
      const double* brow = bv + k * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }

  out->requires_grad = any_grad(a, b);
  if (out->requires_grad) {
    tape.record([a, b, out, m, n, p]() {
      if (out->grad.empty()) return;
      const double* og = out->grad.data();
      if (a->requires_grad) {
        a->ensure_grad();
        double* ag = a->grad.data();
        const double* bv = b->values.data();
        for (std::size_t i = 0; i < m; ++i) {
          const double* ogrow = og + i * p;
          double* agrow = ag + i * n;
          for (std::size_t k = 0; k < n; ++k) {
            const double* brow = bv + k * p;
            double acc = 0.0;
            for (std::size_t j = 0; j < p; ++j) acc += ogrow[j] * brow[j];
            agrow[k] += acc;
          }
        }
      }
      if (b->requires_grad) {
        b->ensure_grad();
        double* bg = b->grad.data();
        const double* av = a->values.data();
        for (std::size_t i = 0; i < m; ++i) {
          const double* arow = av + i * n;
          const double* ogrow = og + i * p;
          for (std::size_t k = 0; k < n; ++k) {
            const double aik = arow[k];
            double* bgrow = bg + k * p;
            for (std::size_t j = 0; j < p; ++j) bgrow[j] += aik * ogrow[j];
          }
        }
      }
    });
  }
  return out;
}

TensorPtr elementwise(Tape& tape, Elementwise op, const TensorPtr& a,
                      const TensorPtr& b) {
  if (a->shape != b->shape) {
    throw DimensionError("elementwise: shape mismatch: " + a->shape_str() +
                         " vs " + b->shape_str());
  }
  auto out = Tensor::zeros(a->shape);
  const std::size_t n = a->size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a->values[i];
    const double y = b->values[i];
    switch (op) {
      case Elementwise::add: out->values[i] = x + y; break;
      case Elementwise::sub: out->values[i] = x - y; break;
      case Elementwise::mul: out->values[i] = x * y; break;
      case Elementwise::abs_diff: out->values[i] = std::abs(x - y); break;
    }
  }
  out->requires_grad = any_grad(a, b);
  if (out->requires_grad) {
    tape.record([a, b, out, op, n]() {
      if (out->grad.empty()) return;
      for (std::size_t i = 0; i < n; ++i) {
        const double g = out->grad[i];
        double da = 0.0, db = 0.0;
        switch (op) {
          case Elementwise::add: da = g; db = g; break;
          case Elementwise::sub: da = g; db = -g; break;
          case Elementwise::mul:
            da = g * b->values[i];
            db = g * a->values[i];
            break;
          case Elementwise::abs_diff: {
            // Subgradient 0 at the kink.
            const double d = a->values[i] - b->values[i];
            const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            da = g * s;
            db = -g * s;
            break;
          }
        }
        if (a->requires_grad) {
          a->ensure_grad();
          a->grad[i] += da;
        }
        if (b->requires_grad) {
          b->ensure_grad();
          b->grad[i] += db;
        }
      }
    });
  }
  return out;
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

TensorPtr activation(Tape& tape, Activation kind, const TensorPtr& x) {
  auto out = Tensor::zeros(x->shape);
  const std::size_t n = x->size();
  for (std::size_t i = 0; i < n; ++i) {
    out->values[i] = kind == Activation::sigmoid
                         ? stable_sigmoid(x->values[i])
                         : std::tanh(x->values[i]);
  }
  out->requires_grad = x->requires_grad;
  if (out->requires_grad) {
    tape.record([x, out, kind, n]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const double y = out->values[i];
        const double d =
            kind == Activation::sigmoid ? y * (1.0 - y) : 1.0 - y * y;
        x->grad[i] += out->grad[i] * d;
      }
    });
  }
  return out;
}

TensorPtr softmax(Tape& tape, const TensorPtr& x) {
  if (x->shape.size() != 1) {
    throw DimensionError("softmax expects a 1-D tensor, got " +
                         x->shape_str());
  }
  const std::size_t n = x->size();
  auto out = Tensor::zeros(x->shape);
  const double mx = *std::max_element(x->values.begin(), x->values.end());
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out->values[i] = std::exp(x->values[i] - mx);
    z += out->values[i];
  }
  for (std::size_t i = 0; i < n; ++i) out->values[i] /= z;
  out->requires_grad = x->requires_grad;
  if (out->requires_grad) {
    tape.record([x, out, n]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += out->grad[i] * out->values[i];
      for (std::size_t i = 0; i < n; ++i) {
        x->grad[i] += out->values[i] * (out->grad[i] - dot);
      }
    });
  }
  return out;
}

TensorPtr concat(Tape& tape, const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw DimensionError("concat of zero parts");
  std::size_t total = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (p->shape.size() != 1) {
      throw DimensionError("concat expects 1-D parts, got " + p->shape_str());
    }
    total += p->size();
    rg = rg || p->requires_grad;
  }
  auto out = Tensor::zeros({total});
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p->values.begin(), p->values.end(), out->values.begin() + off);
    off += p->size();
  }
  out->requires_grad = rg;
  if (rg) {
    tape.record([parts, out]() {
      if (out->grad.empty()) return;
      std::size_t off = 0;
      for (const auto& p : parts) {
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < p->size(); ++i) {
            p->grad[i] += out->grad[off + i];
          }
        }
        off += p->size();
      }
    });
  }
  return out;
}

TensorPtr stack_rows(Tape& tape, const std::vector<TensorPtr>& rows) {
  if (rows.empty()) throw DimensionError("stack_rows of zero rows");
  const std::size_t d = rows[0]->size();
  bool rg = false;
  for (const auto& r : rows) {
    if (r->shape.size() != 1 || r->size() != d) {
      throw DimensionError("stack_rows expects equal-length 1-D rows");
    }
    rg = rg || r->requires_grad;
  }
  auto out = Tensor::zeros({rows.size(), d});
  for (std::size_t t = 0; t < rows.size(); ++t) {
    std::copy(rows[t]->values.begin(), rows[t]->values.end(),
              out->values.begin() + t * d);
  }
  out->requires_grad = rg;
  if (rg) {
    tape.record([rows, out, d]() {
      if (out->grad.empty()) return;
      for (std::size_t t = 0; t < rows.size(); ++t) {
        const auto& r = rows[t];
        if (!r->requires_grad) continue;
        r->ensure_grad();
        for (std::size_t i = 0; i < d; ++i) {
          r->grad[i] += out->grad[t * d + i];
        }
      }
    });
  }
  return out;
}

TensorPtr row(Tape& tape, const TensorPtr& m, std::size_t r) {
  if (m->shape.size() != 2) {
    throw DimensionError("row slice expects a 2-D tensor, got " +
                         m->shape_str());
  }
  if (r >= m->rows()) throw DimensionError("row index out of range");
  const std::size_t d = m->cols();
  auto out = Tensor::zeros({d});
  std::copy(m->values.begin() + r * d, m->values.begin() + (r + 1) * d,
            out->values.begin());
  out->requires_grad = m->requires_grad;
  if (out->requires_grad) {
    tape.record([m, out, r, d]() {
      if (out->grad.empty()) return;
      m->ensure_grad();
      for (std::size_t i = 0; i < d; ++i) {
        m->grad[r * d + i] += out->grad[i];
      }
    });
  }
  return out;
}

TensorPtr max_over_time(Tape& tape, const TensorPtr& h,
                        std::size_t valid_len) {
  if (h->shape.size() != 2) {
    throw DimensionError("max_over_time expects [T x d], got " +
                         h->shape_str());
  }
  if (valid_len == 0) throw Error("max_over_time over an empty sequence");
  if (valid_len > h->rows()) {
    throw DimensionError("valid_len exceeds sequence length");
  }
  const std::size_t d = h->cols();
  auto out = Tensor::zeros({d});
  auto argmax = std::make_shared<std::vector<std::size_t>>(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    double best = h->at(std::size_t{0}, j);
    std::size_t best_t = 0;
    for (std::size_t t = 1; t < valid_len; ++t) {
      const double v = h->at(t, j);
      if (v > best) {  // strict: ties keep the earliest t
        best = v;
        best_t = t;
      }
    }
    out->values[j] = best;
    (*argmax)[j] = best_t;
  }
  out->requires_grad = h->requires_grad;
  if (out->requires_grad) {
    tape.record([h, out, argmax, d]() {
      if (out->grad.empty()) return;
      h->ensure_grad();
      for (std::size_t j = 0; j < d; ++j) {
        h->grad[(*argmax)[j] * d + j] += out->grad[j];
      }
    });
  }
  return out;
}

TensorPtr sum(Tape& tape, const TensorPtr& x) {
  auto out = Tensor::scalar(
      std::accumulate(x->values.begin(), x->values.end(), 0.0));
  out->requires_grad = x->requires_grad;
  if (out->requires_grad) {
    tape.record([x, out]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      const double g = out->grad[0];
      for (double& gi : x->grad) gi += g;
    });
  }
  return out;
}

TensorPtr cross_entropy(Tape& tape, const TensorPtr& probs,
                        const std::vector<int>& labels) {
  if (probs->shape.size() != 2) {
    throw DimensionError("cross_entropy expects probs [B x c], got " +
                         probs->shape_str());
  }
  const std::size_t batch = probs->rows();
  const std::size_t c = probs->cols();
  if (labels.size() != batch) {
    throw Error("cross_entropy: label count does not match batch size");
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= c) {
      throw DataError("cross_entropy: label " + std::to_string(l) +
                      " out of range for " + std::to_string(c) + " classes");
    }
  }
  static constexpr double kClamp = 1e-12;
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    loss -= std::log(std::max(probs->at(b, labels[b]), kClamp));
  }
  loss /= static_cast<double>(batch);
  auto out = Tensor::scalar(loss);
  out->requires_grad = probs->requires_grad;
  if (out->requires_grad) {
    tape.record([probs, out, labels, batch, c]() {
      if (out->grad.empty()) return;
      probs->ensure_grad();
      const double g = out->grad[0];
      for (std::size_t b = 0; b < batch; ++b) {
        const double p = probs->at(b, static_cast<std::size_t>(labels[b]));
        if (p > kClamp) {
          probs->grad[b * c + labels[b]] -=
              g / (p * static_cast<double>(batch));
        }
      }
    });
  }
  return out;
}

TensorPtr add_rowwise(Tape& tape, const TensorPtr& m, const TensorPtr& bias) {
  if (m->shape.size() != 2 || bias->shape.size() != 1 ||
      m->cols() != bias->size()) {
    throw DimensionError("add_rowwise: incompatible shapes " + m->shape_str() +
                         " and " + bias->shape_str());
  }
  const std::size_t batch = m->rows();
  const std::size_t d = m->cols();
  auto out = Tensor::zeros(m->shape);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < d; ++j) {
      out->values[b * d + j] = m->values[b * d + j] + bias->values[j];
    }
  }
  out->requires_grad = any_grad(m, bias);
  if (out->requires_grad) {
    tape.record([m, bias, out, batch, d]() {
      if (out->grad.empty()) return;
      if (m->requires_grad) {
        m->ensure_grad();
        for (std::size_t i = 0; i < batch * d; ++i) {
          m->grad[i] += out->grad[i];
        }
      }
      if (bias->requires_grad) {
        bias->ensure_grad();
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t j = 0; j < d; ++j) {
            bias->grad[j] += out->grad[b * d + j];
          }
        }
      }
    });
  }
  return out;
}

TensorPtr concat_cols(Tape& tape, const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols of zero parts");
  const std::size_t batch = parts[0]->rows();
  std::size_t total = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (p->shape.size() != 2 || p->rows() != batch) {
      throw DimensionError("concat_cols: rows disagree");
    }
    total += p->cols();
    rg = rg || p->requires_grad;
  }
  auto out = Tensor::zeros({batch, total});
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t d = p->cols();
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy(p->values.begin() + b * d, p->values.begin() + (b + 1) * d,
                out->values.begin() + b * total + off);
    }
    off += d;
  }
  out->requires_grad = rg;
  if (rg) {
    tape.record([parts, out, batch, total]() {
      if (out->grad.empty()) return;
      std::size_t off = 0;
      for (const auto& p : parts) {
        const std::size_t d = p->cols();
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t j = 0; j < d; ++j) {
              p->grad[b * d + j] += out->grad[b * total + off + j];
            }
          }
        }
        off += d;
      }
    });
  }
  return out;
}

TensorPtr softmax_rows(Tape& tape, const TensorPtr& m) {
  if (m->shape.size() != 2) {
    throw DimensionError("softmax_rows expects a 2-D tensor, got " +
                         m->shape_str());
  }
  const std::size_t batch = m->rows();
  const std::size_t c = m->cols();
  auto out = Tensor::zeros(m->shape);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = m->values.data() + b * c;
    double* y = out->values.data() + b * c;
    const double mx = *std::max_element(x, x + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      y[j] = std::exp(x[j] - mx);
      z += y[j];
    }
    for (std::size_t j = 0; j < c; ++j) y[j] /= z;
  }
  out->requires_grad = m->requires_grad;
  if (out->requires_grad) {
    tape.record([m, out, batch, c]() {
      if (out->grad.empty()) return;
      m->ensure_grad();
      for (std::size_t b = 0; b < batch; ++b) {
        const double* y = out->values.data() + b * c;
        const double* g = out->grad.data() + b * c;
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) dot += g[j] * y[j];
        for (std::size_t j = 0; j < c; ++j) {
          m->grad[b * c + j] += y[j] * (g[j] - dot);
        }
      }
    });
  }
  return out;
}

TensorPtr max_over_steps(Tape& tape, const std::vector<TensorPtr>& steps,
                         const std::vector<std::size_t>& valid_lens) {
  if (steps.empty()) throw Error("max_over_steps over an empty sequence");
  const std::size_t batch = steps[0]->rows();
  const std::size_t d = steps[0]->cols();
  if (valid_lens.size() != batch) {
    throw DimensionError("max_over_steps: valid_lens size mismatch");
  }
  bool rg = false;
  for (const auto& s : steps) {
    if (s->shape.size() != 2 || s->rows() != batch || s->cols() != d) {
      throw DimensionError("max_over_steps: step shapes disagree");
    }
    rg = rg || s->requires_grad;
  }
  for (std::size_t b = 0; b < batch; ++b) {
    if (valid_lens[b] == 0 || valid_lens[b] > steps.size()) {
      throw Error("max_over_steps: invalid valid_len");
    }
  }
  auto out = Tensor::zeros({batch, d});
  auto argmax = std::make_shared<std::vector<std::size_t>>(batch * d, 0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < d; ++j) {
      double best = steps[0]->values[b * d + j];
      std::size_t best_t = 0;
      for (std::size_t t = 1; t < valid_lens[b]; ++t) {
        const double v = steps[t]->values[b * d + j];
        if (v > best) {
          best = v;
          best_t = t;
        }
      }
      out->values[b * d + j] = best;
      (*argmax)[b * d + j] = best_t;
    }
  }
  out->requires_grad = rg;
  if (rg) {
    tape.record([steps, out, argmax, batch, d]() {
      if (out->grad.empty()) return;
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < d; ++j) {
          const auto& s = steps[(*argmax)[b * d + j]];
          if (!s->requires_grad) continue;
          s->ensure_grad();
          s->grad[b * d + j] += out->grad[b * d + j];
        }
      }
    });
  }
  return out;
}

}  // namespace sag
