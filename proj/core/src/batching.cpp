#include "sag/batching.hpp"

#include "sag/rng.hpp"

namespace sag {

const std::string& Batch::domain() const {
  if (domains.empty()) throw Error("empty batch has no domain");
  for (const auto& d : domains) {
    if (d != domains.front()) {
      throw DataError("mixed-domain batch: " + domains.front() + " vs " + d);
    }
  }
  return domains.front();
}

namespace {

void append_sample(Batch& batch, const Sample& s, std::size_t max_len,
                   const Vocab& vocab) {
  batch.domains.push_back(s.domain);
  batch.ref_ids.push_back(vocab.encode(s.reference, max_len));
  batch.stu_ids.push_back(vocab.encode(s.student, max_len));
  batch.labels.push_back(s.label);
}

}  // namespace

std::vector<Batch> make_batches(const std::vector<Sample>& corpus,
                                std::size_t batch_size, std::size_t max_len,
                                const Vocab& vocab, std::uint64_t seed,
                                std::uint64_t epoch) {
  if (corpus.empty()) throw ConfigError("make_batches: empty corpus");
  if (batch_size == 0) throw ConfigError("make_batches: batch_size must be >= 1");

  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (epoch + 1)));
  rng.shuffle(order);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    Batch batch;
    const std::size_t end = std::min(start + batch_size, order.size());
    for (std::size_t i = start; i < end; ++i) {
      append_sample(batch, corpus[order[i]], max_len, vocab);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

Batch encode_batch_of(const std::vector<Sample>& samples, std::size_t max_len,
                      const Vocab& vocab) {
  Batch batch;
  for (const auto& s : samples) append_sample(batch, s, max_len, vocab);
  return batch;
}

}  // namespace sag
