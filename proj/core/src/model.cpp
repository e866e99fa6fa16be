#include "sag/model.hpp"

#include <ostream>

namespace sag {

Mode mode_from_string(const std::string& s) {
  if (s == "jmd") return Mode::jmd;
  if (s == "generic") return Mode::generic;
  if (s == "domain") return Mode::domain;
  throw ConfigError("unknown mode: " + s + " (expected jmd|generic|domain)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::jmd: return "jmd";
    case Mode::generic: return "generic";
    case Mode::domain: return "domain";
  }
  return "?";
}

void ModelConfig::validate() const {
  if (embedding_dim == 0 || hidden == 0 || max_len == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (classes < 2) throw ConfigError("need at least 2 classes");
  if (domain_names.empty()) throw ConfigError("need at least 1 domain");
}

int MultiDomainModel::domain_index(const std::string& name) const {
  for (std::size_t i = 0; i < cfg.domain_names.size(); ++i) {
    if (cfg.domain_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::pair<std::string, TensorPtr>> MultiDomainModel::named_params()
    const {
  std::vector<std::pair<std::string, TensorPtr>> out;
  out.emplace_back("embedding", embedding.weights);
  if (generic_scorer) {
    auto p = generic_scorer->named_params("generic");
    out.insert(out.end(), p.begin(), p.end());
  }
  for (std::size_t d = 0; d < domain_scorers.size(); ++d) {
    auto p = domain_scorers[d].named_params("domain." + cfg.domain_names[d]);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<std::pair<std::string, TensorPtr>> MultiDomainModel::active_params(
    int domain_idx) const {
  std::vector<std::pair<std::string, TensorPtr>> out;
  out.emplace_back("embedding", embedding.weights);
  if (cfg.mode != Mode::domain) {
    auto p = generic_scorer->named_params("generic");
    out.insert(out.end(), p.begin(), p.end());
  }
  if (cfg.mode != Mode::generic && domain_idx >= 0) {
    const auto d = static_cast<std::size_t>(domain_idx);
    auto p = domain_scorers.at(d).named_params("domain." +
                                               cfg.domain_names[d]);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

MultiDomainModel init_model(const ModelConfig& cfg, const Vocab& vocab,
                            const std::optional<std::string>& pretrained_path,
                            std::uint64_t seed) {
  cfg.validate();
  MultiDomainModel model;
  model.cfg = cfg;
  model.vocab = vocab;
  model.embedding =
      pretrained_path
          ? load_pretrained(*pretrained_path, vocab, cfg.embedding_dim, seed)
          : random_table(vocab, cfg.embedding_dim, seed);

  // Each scorer draws from its own derived seed stream so parameters are
  // pairwise distinct and independent of k.
  auto scorer_for = [&](std::uint64_t stream) {
    Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 2)));
    return ScorerParams::init(cfg.embedding_dim, cfg.hidden, cfg.classes, rng);
  };
  if (cfg.mode != Mode::domain) model.generic_scorer = scorer_for(0);
  if (cfg.mode != Mode::generic) {
    for (std::size_t d = 0; d < cfg.num_domains(); ++d) {
      model.domain_scorers.push_back(scorer_for(d + 1));
    }
  }
  return model;
}

namespace {

void check_domain(const MultiDomainModel& model, int domain_idx) {
  if (domain_idx == -1) {
    if (model.cfg.mode == Mode::domain) {
      throw DataError("unknown domain and no generic scorer to fall back to");
    }
    return;
  }
  const bool needs_scorer = model.cfg.mode != Mode::generic;
  if (domain_idx < 0 ||
      (needs_scorer &&
       static_cast<std::size_t>(domain_idx) >= model.domain_scorers.size())) {
    throw DataError("invalid domain index " + std::to_string(domain_idx));
  }
}

}  // namespace

TensorPtr logits(Tape& tape, const MultiDomainModel& model,
                 const std::vector<int>& ref_ids,
                 const std::vector<int>& stu_ids, int domain_idx) {
  check_domain(model, domain_idx);
  const auto& table = model.embedding;
  const std::size_t max_len = model.cfg.max_len;

  TensorPtr out;
  if (model.cfg.mode != Mode::generic && domain_idx >= 0) {
    out = score(tape, model.domain_scorers[static_cast<std::size_t>(domain_idx)],
                table, ref_ids, stu_ids, max_len);
  }
  if (model.cfg.mode != Mode::domain) {
    auto g = score(tape, *model.generic_scorer, table, ref_ids, stu_ids,
                   max_len);
    out = out ? add(tape, out, g) : g;
  }
  if (!out) throw DataError("no scorer applicable for this domain and mode");
  return out;
}

TensorPtr forward(Tape& tape, const MultiDomainModel& model,
                  const std::vector<int>& ref_ids,
                  const std::vector<int>& stu_ids, int domain_idx) {
  return softmax(tape, logits(tape, model, ref_ids, stu_ids, domain_idx));
}

TensorPtr forward_batch(Tape& tape, const MultiDomainModel& model,
                        const Batch& batch, int domain_idx) {
  check_domain(model, domain_idx);
  const auto& table = model.embedding;
  const std::size_t max_len = model.cfg.max_len;

  TensorPtr scores;
  if (model.cfg.mode != Mode::generic && domain_idx >= 0) {
    scores = score_batch(
        tape, model.domain_scorers[static_cast<std::size_t>(domain_idx)],
        table, batch.ref_ids, batch.stu_ids, max_len);
  }
  if (model.cfg.mode != Mode::domain) {
    auto g = score_batch(tape, *model.generic_scorer, table, batch.ref_ids,
                         batch.stu_ids, max_len);
    scores = scores ? add(tape, scores, g) : g;
  }
  if (!scores) throw DataError("no scorer applicable for this domain and mode");
  return softmax_rows(tape, scores);
}

int argmax_class(const TensorPtr& probs) {
  int best = 0;
  for (std::size_t i = 1; i < probs->size(); ++i) {
    if (probs->values[i] > probs->values[best]) best = static_cast<int>(i);
  }
  return best;
}

int predict(const MultiDomainModel& model, const Sample& sample,
            std::ostream* warn) {
  int domain_idx = model.domain_index(sample.domain);
  if (domain_idx < 0) {
    if (model.cfg.mode == Mode::domain) {
      throw DataError("unknown domain \"" + sample.domain +
                      "\" in domain-only mode");
    }
    if (warn) {
      *warn << "warning: unknown domain \"" << sample.domain
            << "\", falling back to the generic scorer\n";
    }
  }
  NoGradGuard guard(model);
  Tape tape;
  auto ref = model.vocab.encode(sample.reference, model.cfg.max_len);
  auto stu = model.vocab.encode(sample.student, model.cfg.max_len);
  return argmax_class(forward(tape, model, ref, stu, domain_idx));
}

std::vector<int> predict_batch(const MultiDomainModel& model,
                               const std::vector<Sample>& samples,
                               int domain_idx) {
  if (samples.empty()) return {};
  NoGradGuard guard(model);
  std::vector<int> out;
  // Chunked to bound memory on large test sets.
  constexpr std::size_t kChunk = 64;
  for (std::size_t start = 0; start < samples.size(); start += kChunk) {
    std::vector<Sample> chunk(
        samples.begin() + start,
        samples.begin() + std::min(start + kChunk, samples.size()));
    Tape tape;
    auto batch = encode_batch_of(chunk, model.cfg.max_len, model.vocab);
    auto probs = forward_batch(tape, model, batch, domain_idx);
    const std::size_t c = probs->cols();
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      int best = 0;
      for (std::size_t j = 1; j < c; ++j) {
        if (probs->at(b, j) > probs->at(b, static_cast<std::size_t>(best))) {
          best = static_cast<int>(j);
        }
      }
      out.push_back(best);
    }
  }
  return out;
}

NoGradGuard::NoGradGuard(const MultiDomainModel& model) {
  for (auto& [name, t] : model.named_params()) {
    saved_.emplace_back(t, t->requires_grad);
    t->requires_grad = false;
  }
}

NoGradGuard::~NoGradGuard() {
  for (auto& [t, rg] : saved_) t->requires_grad = rg;
}

}  // namespace sag
