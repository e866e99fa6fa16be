#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sag/embeddings.hpp"
#include "sag/rng.hpp"
#include "sag/tensor.hpp"

namespace sag {

/// One direction's LSTM cell parameters (no peepholes).
struct LstmParams {
  TensorPtr Wi, Wf, Wo, Wg;  // input weights [e x H]
  TensorPtr Ui, Uf, Uo, Ug;  // recurrent weights [H x H]
  TensorPtr bi, bf, bo, bg;  // biases [H]
  std::size_t input_dim = 0;
  std::size_t hidden = 0;

  /// Weights uniform(-0.08, 0.08); forget-gate bias 1.0, other biases 0.
  static LstmParams init(std::size_t input_dim, std::size_t hidden, Rng& rng);

  std::vector<std::pair<std::string, TensorPtr>> named_params(
      const std::string& prefix) const;
};

struct EncoderParams {
  LstmParams fwd;
  LstmParams bwd;

  static EncoderParams init(std::size_t input_dim, std::size_t hidden,
                            Rng& rng);

  std::size_t hidden() const { return fwd.hidden; }
  std::size_t output_dim() const { return 2 * fwd.hidden; }

  std::vector<std::pair<std::string, TensorPtr>> named_params(
      const std::string& prefix) const;
};

/// One LSTM cell update. Works for a single sample (x [e], states [H]) and
/// for a batch (x [B x e], states [B x H]) alike.
std::pair<TensorPtr, TensorPtr> lstm_step(Tape& tape, const LstmParams& p,
                                          const TensorPtr& x,
                                          const TensorPtr& h_prev,
                                          const TensorPtr& c_prev);

/// Full bidirectional pass over X [T x e]: row t of the output is
/// [h_t_fwd ; h_t_bwd] for t < valid_len and exactly zero for padding rows.
/// The backward scan starts at the last valid token.
TensorPtr bilstm(Tape& tape, const EncoderParams& p, const TensorPtr& x_seq,
                 std::size_t valid_len);

/// Text encoding: max over valid timesteps of the BiLSTM output, [2H].
TensorPtr encode(Tape& tape, const EncoderParams& p,
                 const EmbeddingTable& table, const std::vector<int>& ids,
                 std::size_t max_len);

/// Batched encoding of B token sequences, [B x 2H]. Row b is value-identical
/// to encode() on sequence b.
TensorPtr encode_batch(Tape& tape, const EncoderParams& p,
                       const EmbeddingTable& table,
                       const std::vector<std::vector<int>>& ids,
                       std::size_t max_len);

}  // namespace sag
