#include "sag/embeddings.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "sag/rng.hpp"

namespace sag {

Vocab::Vocab() {
  id_to_token = {"<pad>", "<unk>"};
  token_to_id = {{"<pad>", kPad}, {"<unk>", kUnk}};
}

int Vocab::add(const std::string& token) {
  auto it = token_to_id.find(token);
  if (it != token_to_id.end()) return it->second;
  int id = static_cast<int>(id_to_token.size());
  id_to_token.push_back(token);
  token_to_id.emplace(token, id);
  return id;
}

int Vocab::id(const std::string& token) const {
  auto it = token_to_id.find(token);
  return it == token_to_id.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(const std::string& text,
                               std::size_t max_len) const {
  std::vector<int> ids;
  for (const auto& tok : tokenize(text)) {
    if (max_len > 0 && ids.size() >= max_len) break;
    ids.push_back(id(tok));
  }
  return ids;
}

Vocab build_vocab(const std::vector<Sample>& corpus, int min_count) {
  if (corpus.empty()) throw DataError("build_vocab: empty corpus");
  std::map<std::string, std::size_t> freq;
  for (const auto& s : corpus) {
    for (const auto& text : {s.reference, s.student, s.question}) {
      for (const auto& tok : tokenize(text)) ++freq[tok];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> entries(freq.begin(),
                                                           freq.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  Vocab vocab;
  for (const auto& [tok, count] : entries) {
    if (count >= static_cast<std::size_t>(min_count)) vocab.add(tok);
  }
  return vocab;
}

namespace {

EmbeddingTable make_table(const Vocab& vocab, std::size_t dim) {
  EmbeddingTable table;
  table.dim = dim;
  table.total = vocab.size() - 2;
  table.weights = Tensor::zeros({vocab.size(), dim}, /*requires_grad=*/true);
  table.weights->name = "embedding";
  table.provenance.assign(vocab.size(), RowInit::random);
  table.provenance[Vocab::kPad] = RowInit::padding;
  return table;
}

void randomize_row(EmbeddingTable& table, std::size_t row, Rng& rng) {
  for (std::size_t j = 0; j < table.dim; ++j) {
    table.weights->values[row * table.dim + j] = rng.uniform(-0.05, 0.05);
  }
}

}  // namespace

EmbeddingTable random_table(const Vocab& vocab, std::size_t dim,
                            std::uint64_t seed) {
  EmbeddingTable table = make_table(vocab, dim);
  Rng rng(seed);
  for (std::size_t row = 1; row < vocab.size(); ++row) {
    randomize_row(table, row, rng);
  }
  return table;
}

EmbeddingTable load_pretrained(const std::string& path, const Vocab& vocab,
                               std::size_t dim, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);

  EmbeddingTable table = make_table(vocab, dim);
  std::vector<bool> filled(vocab.size(), false);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string token;
    is >> token;
    std::vector<double> vec;
    vec.reserve(dim);
    std::string field;
    while (is >> field) {
      try {
        std::size_t used = 0;
        vec.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": unparsable float \"" + field + "\"");
      }
    }
    if (line_no == 1 && vec.size() != dim) {
      throw ConfigError(path + ": embedding file has dimension " +
                        std::to_string(vec.size()) + ", expected " +
                        std::to_string(dim));
    }
    if (vec.size() != dim) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(dim) + " values, got " +
                       std::to_string(vec.size()));
    }
    auto it = vocab.token_to_id.find(token);
    if (it == vocab.token_to_id.end() || it->second == Vocab::kPad ||
        it->second == Vocab::kUnk) {
      continue;
    }
    const std::size_t row = static_cast<std::size_t>(it->second);
    if (filled[row]) continue;  // first occurrence wins
    std::copy(vec.begin(), vec.end(),
              table.weights->values.begin() + row * dim);
    table.provenance[row] = RowInit::pretrained;
    filled[row] = true;
    ++table.found;
  }

  // OOV rows (and <unk>) come from the seed stream, in id order so the
  // draw is reproducible.
  Rng rng(seed);
  for (std::size_t row = 1; row < vocab.size(); ++row) {
    if (table.provenance[row] == RowInit::random) randomize_row(table, row, rng);
  }
  return table;
}

LookupResult lookup(Tape& tape, const EmbeddingTable& table,
                    const std::vector<int>& ids, std::size_t max_len) {
  if (ids.empty()) throw DataError("lookup: empty id sequence");
  const std::size_t e = table.dim;
  const std::size_t valid = std::min(ids.size(), max_len);
  auto truncated = std::make_shared<std::vector<int>>(ids.begin(),
                                                      ids.begin() + valid);
  for (int id : *truncated) {
    if (id < 0 || static_cast<std::size_t>(id) >= table.weights->rows()) {
      throw DimensionError("lookup: token id " + std::to_string(id) +
                           " out of range for vocabulary of " +
                           std::to_string(table.weights->rows()));
    }
  }
  auto out = Tensor::zeros({max_len, e});
  for (std::size_t t = 0; t < valid; ++t) {
    const std::size_t row = static_cast<std::size_t>((*truncated)[t]);
    std::copy(table.weights->values.begin() + row * e,
              table.weights->values.begin() + (row + 1) * e,
              out->values.begin() + t * e);
  }
  out->requires_grad = table.weights->requires_grad;
  if (out->requires_grad) {
    auto weights = table.weights;
    tape.record([weights, out, truncated, e, valid]() {
      if (out->grad.empty()) return;
      weights->ensure_grad();
      for (std::size_t t = 0; t < valid; ++t) {
        const int id = (*truncated)[t];
        if (id == Vocab::kPad) continue;
        const std::size_t row = static_cast<std::size_t>(id);
        for (std::size_t j = 0; j < e; ++j) {
          weights->grad[row * e + j] += out->grad[t * e + j];
        }
      }
    });
  }
  return {out, valid};
}

BatchLookup lookup_batch(Tape& tape, const EmbeddingTable& table,
                         const std::vector<std::vector<int>>& ids,
                         std::size_t max_len) {
  if (ids.empty()) throw DataError("lookup_batch: empty batch");
  const std::size_t batch = ids.size();
  const std::size_t e = table.dim;

  BatchLookup result;
  result.valid_lens.resize(batch);
  std::size_t steps = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (ids[b].empty()) throw DataError("lookup_batch: empty id sequence");
    result.valid_lens[b] = std::min(ids[b].size(), max_len);
    steps = std::max(steps, result.valid_lens[b]);
  }

  auto weights = table.weights;
  for (std::size_t t = 0; t < steps; ++t) {
    auto step_ids = std::make_shared<std::vector<int>>(batch, Vocab::kPad);
    for (std::size_t b = 0; b < batch; ++b) {
      if (t < result.valid_lens[b]) {
        const int id = ids[b][t];
        if (id < 0 || static_cast<std::size_t>(id) >= weights->rows()) {
          throw DimensionError("lookup_batch: token id out of range");
        }
        (*step_ids)[b] = id;
      }
    }
    auto x = Tensor::zeros({batch, e});
    for (std::size_t b = 0; b < batch; ++b) {
      if (t >= result.valid_lens[b]) continue;  // padded position stays zero
      const std::size_t row = static_cast<std::size_t>((*step_ids)[b]);
      std::copy(weights->values.begin() + row * e,
                weights->values.begin() + (row + 1) * e,
                x->values.begin() + b * e);
    }
    x->requires_grad = weights->requires_grad;
    if (x->requires_grad) {
      tape.record([weights, x, step_ids, batch, e]() {
        if (x->grad.empty()) return;
        weights->ensure_grad();
        for (std::size_t b = 0; b < batch; ++b) {
          const int id = (*step_ids)[b];
          if (id == Vocab::kPad) continue;
          const std::size_t row = static_cast<std::size_t>(id);
          for (std::size_t j = 0; j < e; ++j) {
            weights->grad[row * e + j] += x->grad[b * e + j];
          }
        }
      });
    }
    result.steps.push_back(std::move(x));
  }
  return result;
}

}  // namespace sag
