#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sag/batching.hpp"
#include "sag/scorer.hpp"

namespace sag {

enum class Mode { jmd, generic, domain };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

struct ModelConfig {
  std::size_t embedding_dim = 300;
  std::size_t hidden = 100;
  std::size_t max_len = 50;
  std::size_t classes = 0;
  Mode mode = Mode::jmd;
  std::string scheme = "3way";
  std::vector<std::string> domain_names;

  std::size_t num_domains() const { return domain_names.size(); }
  void validate() const;
};

/// k domain-specific scorers plus one generic scorer over a shared
/// embedding table. The mode controls which scorers exist and combine:
/// jmd adds domain and generic scores pre-softmax, generic/domain use one
/// side only.
struct MultiDomainModel {
  ModelConfig cfg;
  Vocab vocab;
  EmbeddingTable embedding;
  std::vector<ScorerParams> domain_scorers;          // empty in generic mode
  std::optional<ScorerParams> generic_scorer;        // absent in domain mode

  int domain_index(const std::string& name) const;   // -1 when unknown

  /// Every learnable tensor, in a fixed serialization order.
  std::vector<std::pair<std::string, TensorPtr>> named_params() const;

  /// Parameters touched by a batch of the given domain under the current
  /// mode: shared embedding, the generic scorer, and/or that domain's scorer.
  std::vector<std::pair<std::string, TensorPtr>> active_params(
      int domain_idx) const;
};

/// Builds k+1 independently initialized scorers over a shared embedding
/// table. Bit-reproducible for a fixed seed.
MultiDomainModel init_model(const ModelConfig& cfg, const Vocab& vocab,
                            const std::optional<std::string>& pretrained_path,
                            std::uint64_t seed);

/// Pre-softmax combined scores for one pair. domain_idx == -1 selects the
/// generic-only fallback (unknown domain at inference).
TensorPtr logits(Tape& tape, const MultiDomainModel& model,
                 const std::vector<int>& ref_ids,
                 const std::vector<int>& stu_ids, int domain_idx);

/// Class-wise probabilities, softmax(logits).
TensorPtr forward(Tape& tape, const MultiDomainModel& model,
                  const std::vector<int>& ref_ids,
                  const std::vector<int>& stu_ids, int domain_idx);

/// Batched probabilities [B x c] for a homogeneous batch.
TensorPtr forward_batch(Tape& tape, const MultiDomainModel& model,
                        const Batch& batch, int domain_idx);

/// Argmax class; ties break to the lowest class index. Unknown domains fall
/// back to the generic scorer with a warning on `warn` when provided.
int predict(const MultiDomainModel& model, const Sample& sample,
            std::ostream* warn = nullptr);

/// Batched argmax predictions for samples of one domain.
std::vector<int> predict_batch(const MultiDomainModel& model,
                               const std::vector<Sample>& samples,
                               int domain_idx);

int argmax_class(const TensorPtr& probs);

/// Temporarily drops requires_grad on all model parameters so evaluation
/// records nothing on the tape.
class NoGradGuard {
 public:
  explicit NoGradGuard(const MultiDomainModel& model);
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  std::vector<std::pair<TensorPtr, bool>> saved_;
};

}  // namespace sag
