#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sag/metrics.hpp"

namespace sag {

/// Domain interleaving granularity: after every batch (the proposed
/// schedule), after every epoch, or only once a domain's full budget is
/// spent (domain-sequential).
enum class Protocol { batch, epoch, domain };

Protocol protocol_from_string(const std::string& s);
std::string to_string(Protocol p);

struct TrainConfig {
  Protocol protocol = Protocol::batch;
  int epochs = 15;
  std::size_t batch_size = 32;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 42;
  std::size_t max_len = 50;
  std::optional<double> clip_norm;

  void validate() const;
};

/// Per-parameter Adam moments with bias correction. Each parameter keeps
/// its own step counter, so parameters outside a batch's active set are
/// left bit-unchanged.
class AdamState {
 public:
  void step(const std::vector<std::pair<std::string, TensorPtr>>& params,
            const TrainConfig& cfg);

 private:
  struct Slot {
    std::vector<double> m, v;
    long t = 0;
  };
  std::unordered_map<const Tensor*, Slot> slots_;
};

/// One forward/backward/Adam step on a homogeneous batch. Updates the
/// shared embedding plus the scorers the model's mode activates for the
/// batch's domain. Returns the batch loss.
double train_on_batch(MultiDomainModel& model, AdamState& adam,
                      const Batch& batch, const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  std::string protocol;
  std::string stage;  // active domain under the domain protocol, else ""
  std::vector<std::pair<std::string, double>> domain_loss;
  std::optional<MetricsReport> dev_metrics;
};

using History = std::vector<EpochRecord>;

/// Line-delimited JSON, one record per epoch.
void write_history(const std::string& path, const History& history);

/// Trains under the configured protocol. Domain order is the input corpus
/// order. Unequal domain sizes share num_batches = ceil(max|D|/batch_size);
/// smaller domains wrap around with a fresh shuffle. Dev metrics are
/// recorded per epoch when any corpus carries a dev split.
History train(MultiDomainModel& model, const std::vector<DomainCorpus>& domains,
              const TrainConfig& cfg, const LabelScheme& scheme);

}  // namespace sag
