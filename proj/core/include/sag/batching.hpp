#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sag/data.hpp"
#include "sag/embeddings.hpp"

namespace sag {

/// Id-encoded mini-batch. Sequences are truncated to max_len at encoding
/// time; padding happens inside lookup.
struct Batch {
  std::vector<std::string> domains;  // per sample, for homogeneity checks
  std::vector<std::vector<int>> ref_ids;
  std::vector<std::vector<int>> stu_ids;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  /// The single domain of this batch; throws on a mixed batch.
  const std::string& domain() const;
};

/// Seeded shuffle keyed by (seed, epoch); the final short batch is kept.
std::vector<Batch> make_batches(const std::vector<Sample>& corpus,
                                std::size_t batch_size, std::size_t max_len,
                                const Vocab& vocab, std::uint64_t seed,
                                std::uint64_t epoch);

/// Encodes samples in input order without shuffling (evaluation path).
Batch encode_batch_of(const std::vector<Sample>& samples, std::size_t max_len,
                      const Vocab& vocab);

}  // namespace sag
