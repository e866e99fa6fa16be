#include "sag/gradcheck.hpp"

#include <cmath>

#include "sag/embeddings.hpp"
#include "sag/encoder.hpp"
#include "sag/rng.hpp"
#include "sag/scorer.hpp"

namespace sag {

double max_rel_error(const LossFn& fn, const std::vector<TensorPtr>& inputs) {
  constexpr double kStep = 1e-5;

  Tape tape;
  for (const auto& in : inputs) in->zero_grad();
  auto loss = fn(tape, inputs);
  tape.backward(loss);

  std::vector<std::vector<double>> analytic;
  for (const auto& in : inputs) {
    in->ensure_grad();
    analytic.push_back(in->grad);
  }

  auto eval = [&]() {
    Tape t;
    return fn(t, inputs)->values[0];
  };

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto& v = inputs[i]->values;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double orig = v[j];
      v[j] = orig + kStep;
      const double up = eval();
      v[j] = orig - kStep;
      const double down = eval();
      v[j] = orig;
      const double numeric = (up - down) / (2.0 * kStep);
      const double a = analytic[i][j];
      const double err = std::abs(a - numeric) /
                         std::max({1.0, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

namespace {

TensorPtr random_tensor(std::vector<std::size_t> shape, Rng& rng,
                        double scale = 1.0) {
  auto t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
  for (double& v : t->values) v = rng.uniform(-scale, scale);
  return t;
}

// Projects a tensor to a scalar with fixed pseudo-random weights so every
// output element influences the loss.
TensorPtr project(Tape& tape, const TensorPtr& x, std::uint64_t salt) {
  Rng rng(salt);
  auto w = Tensor::zeros(x->shape);
  for (double& v : w->values) v = rng.uniform(0.5, 1.5);
  return sum(tape, mul(tape, x, w));
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed, double tol) {
  std::vector<GradCheckResult> results;
  Rng rng(seed);

  auto check = [&](const std::string& name, const LossFn& fn,
                   const std::vector<TensorPtr>& inputs) {
    const double err = max_rel_error(fn, inputs);
    results.push_back({name, err, err < tol});
  };

  // -- elementary ops ------------------------------------------------------
  check("matmul",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, matmul(t, in[0], in[1]), 11);
        },
        {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)});

  {
    auto a = random_tensor({6}, rng);
    auto b = random_tensor({6}, rng);
    // Keep clear of the abs kink.
    for (std::size_t i = 0; i < 6; ++i) {
      if (std::abs(a->values[i] - b->values[i]) < 0.05) a->values[i] += 0.2;
    }
    const std::vector<std::pair<std::string, Elementwise>> elementwise_ops{
        {"add", Elementwise::add},
        {"sub", Elementwise::sub},
        {"mul", Elementwise::mul},
        {"abs_diff", Elementwise::abs_diff}};
    for (const auto& [name, op] : elementwise_ops) {
      check(name,
            [op](Tape& t, const std::vector<TensorPtr>& in) {
              return project(t, elementwise(t, op, in[0], in[1]), 13);
            },
            {a, b});
    }
  }

  check("sigmoid",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, sigmoid(t, in[0]), 17);
        },
        {random_tensor({7}, rng, 2.0)});
  check("tanh",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, tanh_of(t, in[0]), 19);
        },
        {random_tensor({7}, rng, 2.0)});
  check("softmax",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, softmax(t, in[0]), 23);
        },
        {random_tensor({5}, rng, 2.0)});
  check("concat",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, concat(t, {in[0], in[1], in[2]}), 29);
        },
        {random_tensor({3}, rng), random_tensor({1}, rng),
         random_tensor({4}, rng)});
  check("stack_rows",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, stack_rows(t, {in[0], in[1]}), 31);
        },
        {random_tensor({4}, rng), random_tensor({4}, rng)});
  check("row",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, row(t, in[0], 1), 37);
        },
        {random_tensor({3, 4}, rng)});
  check("max_over_time",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, max_over_time(t, in[0], 3), 41);
        },
        {random_tensor({4, 5}, rng)});
  check("cross_entropy",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return cross_entropy(t, softmax_rows(t, in[0]), {1, 0});
        },
        {random_tensor({2, 3}, rng)});

  // -- batched variants ----------------------------------------------------
  check("add_rowwise",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, add_rowwise(t, in[0], in[1]), 43);
        },
        {random_tensor({3, 4}, rng), random_tensor({4}, rng)});
  check("concat_cols",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, concat_cols(t, {in[0], in[1]}), 47);
        },
        {random_tensor({3, 2}, rng), random_tensor({3, 3}, rng)});
  check("softmax_rows",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(t, softmax_rows(t, in[0]), 53);
        },
        {random_tensor({3, 4}, rng, 2.0)});
  check("max_over_steps",
        [](Tape& t, const std::vector<TensorPtr>& in) {
          return project(
              t, max_over_steps(t, {in[0], in[1], in[2]}, {3, 2, 1}), 59);
        },
        {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng),
         random_tensor({3, 4}, rng)});

  // -- composed paths at e=3, H=4, T=5, c=3 --------------------------------
  const std::size_t e = 3, hidden = 4, t_len = 5, classes = 3;

  {
    auto cell = LstmParams::init(e, hidden, rng);
    std::vector<TensorPtr> inputs{random_tensor({e}, rng),
                                  random_tensor({hidden}, rng, 0.5),
                                  random_tensor({hidden}, rng, 0.5)};
    for (auto& [name, p] : cell.named_params("cell")) inputs.push_back(p);
    check("lstm_step",
          [cell](Tape& t, const std::vector<TensorPtr>& in) {
            auto [h, c] = lstm_step(t, cell, in[0], in[1], in[2]);
            return add(t, project(t, h, 61), project(t, c, 67));
          },
          inputs);
  }

  {
    auto enc = EncoderParams::init(e, hidden, rng);
    std::vector<TensorPtr> inputs{random_tensor({t_len, e}, rng)};
    for (auto& [name, p] : enc.named_params("enc")) inputs.push_back(p);
    check("bilstm",
          [enc](Tape& t, const std::vector<TensorPtr>& in) {
            return project(t, bilstm(t, enc, in[0], 4), 71);
          },
          inputs);
    check("encode_maxpool",
          [enc](Tape& t, const std::vector<TensorPtr>& in) {
            return project(t, max_over_time(t, bilstm(t, enc, in[0], 4), 4),
                           73);
          },
          inputs);
  }

  {
    // Fully composed path: embedding -> BiLSTM -> maxpool -> feature ->
    // dense -> softmax -> cross-entropy.
    EmbeddingTable table;
    table.dim = e;
    table.weights = random_tensor({8, e}, rng, 0.5);
    auto scorer = ScorerParams::init(e, hidden, classes, rng);
    const std::vector<int> ref_ids{2, 3, 4};
    const std::vector<int> stu_ids{5, 6, 2, 7, 3};

    std::vector<TensorPtr> inputs{table.weights};
    for (auto& [name, p] : scorer.named_params("scorer")) inputs.push_back(p);

    check("full_path",
          [table, scorer, ref_ids, stu_ids, t_len](
              Tape& t, const std::vector<TensorPtr>&) {
            auto s = score(t, scorer, table, ref_ids, stu_ids, t_len);
            auto probs = stack_rows(t, {softmax(t, s)});
            return cross_entropy(t, probs, {1});
          },
          inputs);

    check("full_path_batched",
          [table, scorer, ref_ids, stu_ids, t_len](
              Tape& t, const std::vector<TensorPtr>&) {
            auto s = score_batch(t, scorer, table, {ref_ids, stu_ids},
                                 {stu_ids, ref_ids}, t_len);
            return cross_entropy(t, softmax_rows(t, s), {1, 0});
          },
          inputs);
  }

  return results;
}

}  // namespace sag
