#include "sag/encoder.hpp"

#include <algorithm>

namespace sag {

namespace {

TensorPtr uniform_tensor(std::vector<std::size_t> shape, double lo, double hi,
                         Rng& rng) {
  auto t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
  for (double& v : t->values) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

LstmParams LstmParams::init(std::size_t input_dim, std::size_t hidden,
                            Rng& rng) {
  constexpr double kScale = 0.08;
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  for (TensorPtr* w : {&p.Wi, &p.Wf, &p.Wo, &p.Wg}) {
    *w = uniform_tensor({input_dim, hidden}, -kScale, kScale, rng);
  }
  for (TensorPtr* u : {&p.Ui, &p.Uf, &p.Uo, &p.Ug}) {
    *u = uniform_tensor({hidden, hidden}, -kScale, kScale, rng);
  }
  for (TensorPtr* b : {&p.bi, &p.bf, &p.bo, &p.bg}) {
    *b = Tensor::zeros({hidden}, /*requires_grad=*/true);
  }
  std::fill(p.bf->values.begin(), p.bf->values.end(), 1.0);
  return p;
}

std::vector<std::pair<std::string, TensorPtr>> LstmParams::named_params(
    const std::string& prefix) const {
  return {{prefix + ".Wi", Wi}, {prefix + ".Wf", Wf}, {prefix + ".Wo", Wo},
          {prefix + ".Wg", Wg}, {prefix + ".Ui", Ui}, {prefix + ".Uf", Uf},
          {prefix + ".Uo", Uo}, {prefix + ".Ug", Ug}, {prefix + ".bi", bi},
          {prefix + ".bf", bf}, {prefix + ".bo", bo}, {prefix + ".bg", bg}};
}

EncoderParams EncoderParams::init(std::size_t input_dim, std::size_t hidden,
                                  Rng& rng) {
  EncoderParams p;
  p.fwd = LstmParams::init(input_dim, hidden, rng);
  p.bwd = LstmParams::init(input_dim, hidden, rng);
  return p;
}

std::vector<std::pair<std::string, TensorPtr>> EncoderParams::named_params(
    const std::string& prefix) const {
  auto out = fwd.named_params(prefix + ".fwd");
  auto b = bwd.named_params(prefix + ".bwd");
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

namespace {

TensorPtr add_bias(Tape& tape, const TensorPtr& pre, const TensorPtr& bias) {
  return pre->shape.size() == 1 ? add(tape, pre, bias)
                                : add_rowwise(tape, pre, bias);
}

TensorPtr gate_pre(Tape& tape, const LstmParams& p, const TensorPtr& x,
                   const TensorPtr& h, const TensorPtr& w, const TensorPtr& u,
                   const TensorPtr& b) {
  auto pre = add(tape, matmul(tape, x, w), matmul(tape, h, u));
  return add_bias(tape, pre, b);
}

}  // namespace

std::pair<TensorPtr, TensorPtr> lstm_step(Tape& tape, const LstmParams& p,
                                          const TensorPtr& x,
                                          const TensorPtr& h_prev,
                                          const TensorPtr& c_prev) {
  auto i = sigmoid(tape, gate_pre(tape, p, x, h_prev, p.Wi, p.Ui, p.bi));
  auto f = sigmoid(tape, gate_pre(tape, p, x, h_prev, p.Wf, p.Uf, p.bf));
  auto o = sigmoid(tape, gate_pre(tape, p, x, h_prev, p.Wo, p.Uo, p.bo));
  auto g = tanh_of(tape, gate_pre(tape, p, x, h_prev, p.Wg, p.Ug, p.bg));
  auto c = add(tape, mul(tape, f, c_prev), mul(tape, i, g));
  auto h = mul(tape, o, tanh_of(tape, c));
  return {h, c};
}

TensorPtr bilstm(Tape& tape, const EncoderParams& p, const TensorPtr& x_seq,
                 std::size_t valid_len) {
  if (x_seq->shape.size() != 2) {
    throw DimensionError("bilstm expects [T x e], got " + x_seq->shape_str());
  }
  if (valid_len == 0) throw DataError("bilstm over an empty sequence");
  const std::size_t t_max = x_seq->rows();
  if (valid_len > t_max) throw DimensionError("valid_len exceeds T");
  const std::size_t hidden = p.hidden();

  std::vector<TensorPtr> h_fwd(valid_len), h_bwd(valid_len);
  auto h = Tensor::zeros({hidden});
  auto c = Tensor::zeros({hidden});
  for (std::size_t t = 0; t < valid_len; ++t) {
    std::tie(h, c) = lstm_step(tape, p.fwd, row(tape, x_seq, t), h, c);
    h_fwd[t] = h;
  }
  h = Tensor::zeros({hidden});
  c = Tensor::zeros({hidden});
  for (std::size_t t = valid_len; t-- > 0;) {
    std::tie(h, c) = lstm_step(tape, p.bwd, row(tape, x_seq, t), h, c);
    h_bwd[t] = h;
  }

  std::vector<TensorPtr> rows;
  rows.reserve(t_max);
  for (std::size_t t = 0; t < valid_len; ++t) {
    rows.push_back(concat(tape, {h_fwd[t], h_bwd[t]}));
  }
  for (std::size_t t = valid_len; t < t_max; ++t) {
    rows.push_back(Tensor::zeros({2 * hidden}));
  }
  return stack_rows(tape, rows);
}

TensorPtr encode(Tape& tape, const EncoderParams& p,
                 const EmbeddingTable& table, const std::vector<int>& ids,
                 std::size_t max_len) {
  auto looked = lookup(tape, table, ids, max_len);
  auto states = bilstm(tape, p, looked.seq, looked.valid_len);
  return max_over_time(tape, states, looked.valid_len);
}

TensorPtr encode_batch(Tape& tape, const EncoderParams& p,
                       const EmbeddingTable& table,
                       const std::vector<std::vector<int>>& ids,
                       std::size_t max_len) {
  const std::size_t batch = ids.size();

  // The backward direction consumes each sequence reversed within its valid
  // prefix, so its scan starts at the last real token, never at padding.
  std::vector<std::vector<int>> reversed(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t valid = std::min(ids[b].size(), max_len);
    reversed[b].assign(ids[b].begin(),
                       ids[b].begin() + static_cast<std::ptrdiff_t>(valid));
    std::reverse(reversed[b].begin(), reversed[b].end());
  }

  auto fwd_in = lookup_batch(tape, table, ids, max_len);
  auto bwd_in = lookup_batch(tape, table, reversed, max_len);
  const std::size_t steps = fwd_in.steps.size();
  const std::size_t hidden = p.hidden();

  auto scan = [&](const LstmParams& cell,
                  const std::vector<TensorPtr>& inputs) {
    std::vector<TensorPtr> outputs;
    outputs.reserve(steps);
    auto h = Tensor::zeros({batch, hidden});
    auto c = Tensor::zeros({batch, hidden});
    for (std::size_t t = 0; t < steps; ++t) {
      std::tie(h, c) = lstm_step(tape, cell, inputs[t], h, c);
      outputs.push_back(h);
    }
    return outputs;
  };

  auto h_fwd = scan(p.fwd, fwd_in.steps);
  auto h_bwd = scan(p.bwd, bwd_in.steps);

  // Max over a set of timesteps is order-invariant, so pooling the reversed
  // backward outputs directly matches the per-sample path.
  auto pooled_fwd = max_over_steps(tape, h_fwd, fwd_in.valid_lens);
  auto pooled_bwd = max_over_steps(tape, h_bwd, bwd_in.valid_lens);
  return concat_cols(tape, {pooled_fwd, pooled_bwd});
}

}  // namespace sag
