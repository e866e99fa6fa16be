#include <benchmark/benchmark.h>

#include "sag/model.hpp"
#include "sag/rng.hpp"
#include "sag/trainer.hpp"

namespace {

using namespace sag;

Vocab bench_vocab(std::size_t words) {
  Vocab v;
  for (std::size_t i = 0; i < words; ++i) v.add("w" + std::to_string(i));
  return v;
}

std::vector<int> random_ids(const Vocab& v, std::size_t len, Rng& rng) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < len; ++i) {
    ids.push_back(2 + static_cast<int>(rng.next_below(v.size() - 2)));
  }
  return ids;
}

void BM_EncodeForward(benchmark::State& state) {
  Vocab v = bench_vocab(200);
  auto table = random_table(v, 50, 1);
  Rng rng(2);
  auto enc = EncoderParams::init(50, 32, rng);
  auto ids = random_ids(v, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) {
    Tape tape;
    auto out = encode(tape, enc, table, ids, 50);
    benchmark::DoNotOptimize(out->values.data());
  }
}
BENCHMARK(BM_EncodeForward)->Arg(10)->Arg(25)->Arg(50);

void BM_ScoreBatchBackward(benchmark::State& state) {
  Vocab v = bench_vocab(200);
  auto table = random_table(v, 50, 1);
  Rng rng(3);
  auto scorer = ScorerParams::init(50, 32, 3, rng);
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<int>> refs, stus;
  std::vector<int> labels;
  for (std::size_t b = 0; b < batch; ++b) {
    refs.push_back(random_ids(v, 12, rng));
    stus.push_back(random_ids(v, 9, rng));
    labels.push_back(static_cast<int>(b % 3));
  }
  for (auto _ : state) {
    Tape tape;
    auto probs = softmax_rows(tape, score_batch(tape, scorer, table, refs,
                                                stus, 50));
    auto loss = cross_entropy(tape, probs, labels);
    tape.backward(loss);
    benchmark::DoNotOptimize(loss->values[0]);
  }
}
BENCHMARK(BM_ScoreBatchBackward)->Arg(8)->Arg(32);

void BM_AdamStep(benchmark::State& state) {
  Rng rng(4);
  auto scorer = ScorerParams::init(50, 32, 3, rng);
  auto params = scorer.named_params("s");
  for (auto& [name, p] : params) {
    p->ensure_grad();
    for (double& g : p->grad) g = rng.uniform(-0.01, 0.01);
  }
  TrainConfig cfg;
  AdamState adam;
  for (auto _ : state) {
    adam.step(params, cfg);
  }
}
BENCHMARK(BM_AdamStep);

}  // namespace

BENCHMARK_MAIN();
