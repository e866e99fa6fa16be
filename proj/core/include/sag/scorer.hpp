#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sag/encoder.hpp"

namespace sag {

/// One text similarity scorer: a private BiLSTM encoder plus a dense head
/// with no bias. Distinct scorers share no storage except the corpus-level
/// embedding table.
struct ScorerParams {
  EncoderParams encoder;
  TensorPtr dense;  // [4d x c]
  std::size_t classes = 0;

  static ScorerParams init(std::size_t input_dim, std::size_t hidden,
                           std::size_t classes, Rng& rng);

  std::vector<std::pair<std::string, TensorPtr>> named_params(
      const std::string& prefix) const;
};

/// f = [eR, eS, eR*eS, |eR - eS|], length 4d.
TensorPtr build_feature(Tape& tape, const TensorPtr& enc_ref,
                        const TensorPtr& enc_stu);

/// Batched feature rows, [B x 4d].
TensorPtr build_feature_batch(Tape& tape, const TensorPtr& enc_ref,
                              const TensorPtr& enc_stu);

/// Raw class-wise scores s = W'f (no softmax here).
TensorPtr score(Tape& tape, const ScorerParams& p, const EmbeddingTable& table,
                const std::vector<int>& ref_ids,
                const std::vector<int>& stu_ids, std::size_t max_len);

/// Batched raw scores, [B x c].
TensorPtr score_batch(Tape& tape, const ScorerParams& p,
                      const EmbeddingTable& table,
                      const std::vector<std::vector<int>>& ref_ids,
                      const std::vector<std::vector<int>>& stu_ids,
                      std::size_t max_len);

}  // namespace sag
