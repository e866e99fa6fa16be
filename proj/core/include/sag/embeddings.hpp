#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sag/data.hpp"
#include "sag/tensor.hpp"

namespace sag {

struct Vocab {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  std::vector<std::string> id_to_token;  // [0]="<pad>", [1]="<unk>"
  std::unordered_map<std::string, int> token_to_id;

  Vocab();

  int add(const std::string& token);
  int id(const std::string& token) const;  // kUnk when absent
  std::size_t size() const { return id_to_token.size(); }

  std::vector<int> encode(const std::string& text,
                          std::size_t max_len = 0) const;
};

/// Tokens with corpus frequency >= min_count, ids ordered by frequency
/// descending then lexicographic. Question text is included for coverage.
Vocab build_vocab(const std::vector<Sample>& corpus, int min_count = 1);

enum class RowInit : std::uint8_t { padding = 0, pretrained = 1, random = 2 };

struct EmbeddingTable {
  TensorPtr weights;  // [V x e], requires_grad
  std::vector<RowInit> provenance;
  std::size_t dim = 0;
  std::size_t found = 0;  // vocab tokens found in the pretrained file
  std::size_t total = 0;  // non-reserved vocab tokens
};

/// All non-reserved rows drawn uniform(-0.05, 0.05) from the seed stream;
/// the padding row stays zero.
EmbeddingTable random_table(const Vocab& vocab, std::size_t dim,
                            std::uint64_t seed);

/// Text format: one token per line, token then `dim` floats, single-space
/// separated. Vocab tokens absent from the file fall back to random rows.
EmbeddingTable load_pretrained(const std::string& path, const Vocab& vocab,
                               std::size_t dim, std::uint64_t seed);

struct LookupResult {
  TensorPtr seq;  // [max_len x e]; rows past valid_len are the zero pad row
  std::size_t valid_len = 0;
};

/// Truncates to max_len, pads with the zero row, and routes gradients back
/// into the table rows used (never into the padding row).
LookupResult lookup(Tape& tape, const EmbeddingTable& table,
                    const std::vector<int>& ids, std::size_t max_len);

/// Batched per-timestep gather: step t is a [B x e] matrix whose row b is
/// the embedding of ids[b][t] (pad row past that sample's length). The
/// number of steps is min(max_len, longest sequence in the batch).
struct BatchLookup {
  std::vector<TensorPtr> steps;
  std::vector<std::size_t> valid_lens;
};
BatchLookup lookup_batch(Tape& tape, const EmbeddingTable& table,
                         const std::vector<std::vector<int>>& ids,
                         std::size_t max_len);

}  // namespace sag
