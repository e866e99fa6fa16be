#include "sag/trainer.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace sag {

Protocol protocol_from_string(const std::string& s) {
  if (s == "batch") return Protocol::batch;
  if (s == "epoch") return Protocol::epoch;
  if (s == "domain") return Protocol::domain;
  throw ConfigError("unknown protocol: " + s +
                    " (expected batch|epoch|domain)");
}

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::batch: return "batch";
    case Protocol::epoch: return "epoch";
    case Protocol::domain: return "domain";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
}

void AdamState::step(
    const std::vector<std::pair<std::string, TensorPtr>>& params,
    const TrainConfig& cfg) {
  if (cfg.clip_norm) {
    double sq = 0.0;
    for (const auto& [name, p] : params) {
      p->ensure_grad();
      for (double g : p->grad) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > *cfg.clip_norm) {
      const double scale = *cfg.clip_norm / norm;
      for (const auto& [name, p] : params) {
        for (double& g : p->grad) g *= scale;
      }
    }
  }

  for (const auto& [name, p] : params) {
    p->ensure_grad();
    for (double g : p->grad) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in tensor \"" + name + "\"");
      }
    }
    Slot& slot = slots_[p.get()];
    if (slot.m.empty()) {
      slot.m.assign(p->size(), 0.0);
      slot.v.assign(p->size(), 0.0);
    }
    ++slot.t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(slot.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(slot.t));
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double g = p->grad[i];
      slot.m[i] = cfg.beta1 * slot.m[i] + (1.0 - cfg.beta1) * g;
      slot.v[i] = cfg.beta2 * slot.v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = slot.m[i] / bc1;
      const double v_hat = slot.v[i] / bc2;
      p->values[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

double train_on_batch(MultiDomainModel& model, AdamState& adam,
                      const Batch& batch, const TrainConfig& cfg) {
  const std::string& domain = batch.domain();  // throws on mixed batches
  int domain_idx = model.domain_index(domain);
  if (domain_idx < 0 && model.cfg.mode != Mode::generic) {
    throw DataError("cannot train on unknown domain \"" + domain + "\"");
  }

  auto active = model.active_params(domain_idx);
  for (auto& [name, p] : active) p->zero_grad();

  Tape tape;
  auto probs = forward_batch(tape, model, batch, domain_idx);
  auto loss = cross_entropy(tape, probs, batch.labels);
  tape.backward(loss);
  adam.step(active, cfg);
  return loss->values[0];
}

namespace {

// Enough batches to fill a shared epoch of num_batches, wrapping with a
// fresh shuffle when the domain is smaller than the largest one.
std::vector<Batch> epoch_batches(const std::vector<Sample>& samples,
                                 const Vocab& vocab, const TrainConfig& cfg,
                                 std::uint64_t epoch_key,
                                 std::size_t num_batches) {
  std::vector<Batch> out;
  std::uint64_t wrap = 0;
  while (out.size() < num_batches) {
    auto more = make_batches(samples, cfg.batch_size, cfg.max_len, vocab,
                             cfg.seed, epoch_key * 1024 + wrap);
    for (auto& b : more) {
      if (out.size() >= num_batches) break;
      out.push_back(std::move(b));
    }
    ++wrap;
  }
  return out;
}

}  // namespace

History train(MultiDomainModel& model, const std::vector<DomainCorpus>& domains,
              const TrainConfig& cfg, const LabelScheme& scheme) {
  cfg.validate();
  if (domains.empty()) throw ConfigError("train: no domain corpora");
  std::size_t largest = 0;
  bool have_dev = false;
  for (const auto& d : domains) {
    if (d.train.empty()) {
      throw ConfigError("train: domain \"" + d.domain +
                        "\" has an empty training set");
    }
    if (model.domain_index(d.domain) < 0 && model.cfg.mode != Mode::generic) {
      throw ConfigError("train: domain \"" + d.domain +
                        "\" is unknown to the model");
    }
    largest = std::max(largest, d.train.size());
    have_dev = have_dev || !d.dev.empty();
  }
  const std::size_t num_batches =
      (largest + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t k = domains.size();

  AdamState adam;
  History history;

  auto finish_epoch = [&](int epoch, const std::string& stage,
                          std::vector<std::pair<std::string, double>> losses) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.protocol = to_string(cfg.protocol);
    rec.stage = stage;
    rec.domain_loss = std::move(losses);
    if (have_dev) {
      rec.dev_metrics = evaluate(model, domains, scheme, Split::dev);
    }
    history.push_back(std::move(rec));
  };

  switch (cfg.protocol) {
    case Protocol::batch: {
      for (int e = 1; e <= cfg.epochs; ++e) {
        std::vector<std::vector<Batch>> batches(k);
        for (std::size_t d = 0; d < k; ++d) {
          batches[d] = epoch_batches(domains[d].train, model.vocab, cfg,
                                     static_cast<std::uint64_t>(e) * k + d,
                                     num_batches);
        }
        std::vector<std::pair<std::string, double>> losses;
        std::vector<double> sums(k, 0.0);
        for (std::size_t b = 0; b < num_batches; ++b) {
          for (std::size_t d = 0; d < k; ++d) {
            sums[d] += train_on_batch(model, adam, batches[d][b], cfg);
          }
        }
        for (std::size_t d = 0; d < k; ++d) {
          losses.emplace_back(domains[d].domain,
                              sums[d] / static_cast<double>(num_batches));
        }
        finish_epoch(e, "", std::move(losses));
      }
      break;
    }
    case Protocol::epoch: {
      for (int e = 1; e <= cfg.epochs; ++e) {
        std::vector<std::pair<std::string, double>> losses;
        for (std::size_t d = 0; d < k; ++d) {
          auto batches = epoch_batches(domains[d].train, model.vocab, cfg,
                                       static_cast<std::uint64_t>(e) * k + d,
                                       num_batches);
          double sum = 0.0;
          for (auto& batch : batches) {
            sum += train_on_batch(model, adam, batch, cfg);
          }
          losses.emplace_back(domains[d].domain,
                              sum / static_cast<double>(num_batches));
        }
        finish_epoch(e, "", std::move(losses));
      }
      break;
    }
    case Protocol::domain: {
      // "Converged" means the full epoch budget per domain.
      int global_epoch = 0;
      for (std::size_t d = 0; d < k; ++d) {
        for (int e = 1; e <= cfg.epochs; ++e) {
          auto batches = epoch_batches(domains[d].train, model.vocab, cfg,
                                       static_cast<std::uint64_t>(e) * k + d,
                                       num_batches);
          double sum = 0.0;
          for (auto& batch : batches) {
            sum += train_on_batch(model, adam, batch, cfg);
          }
          ++global_epoch;
          finish_epoch(global_epoch, domains[d].domain,
                       {{domains[d].domain,
                         sum / static_cast<double>(num_batches)}});
        }
      }
      break;
    }
  }
  return history;
}

void write_history(const std::string& path, const History& history) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write history file: " + path);
  for (const auto& rec : history) {
    nlohmann::json j{{"epoch", rec.epoch},
                     {"protocol", rec.protocol},
                     {"stage", rec.stage}};
    nlohmann::json losses = nlohmann::json::object();
    for (const auto& [domain, loss] : rec.domain_loss) losses[domain] = loss;
    j["loss"] = losses;
    if (rec.dev_metrics) {
      nlohmann::json m = nlohmann::json::object();
      for (const auto& dm : rec.dev_metrics->per_domain) {
        m[dm.domain] = {{"accuracy", dm.scores.accuracy},
                        {"macro_f1", dm.scores.macro_f1},
                        {"weighted_f1", dm.scores.weighted_f1},
                        {"support", dm.support}};
      }
      const auto& ov = rec.dev_metrics->overall;
      m["overall"] = {{"accuracy", ov.scores.accuracy},
                      {"macro_f1", ov.scores.macro_f1},
                      {"weighted_f1", ov.scores.weighted_f1},
                      {"support", ov.support}};
      j["dev"] = m;
    }
    out << j.dump() << "\n";
  }
}

}  // namespace sag
