#include "sag/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sag {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'G', 'C', 'K', 'P', 'T', '\x01'};

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) throw DataError("checkpoint: truncated integer");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const std::uint64_t n = get_u64(is);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw DataError("checkpoint: truncated string");
  return s;
}

void put_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
  put_string(os, name);
  put_u64(os, t.shape.size());
  for (std::size_t d : t.shape) put_u64(os, d);
  static_assert(sizeof(double) == 8);
  os.write(reinterpret_cast<const char*>(t.values.data()),
           static_cast<std::streamsize>(t.values.size() * sizeof(double)));
}

void get_tensor_into(std::istream& is, const std::string& expect_name,
                     Tensor& t) {
  const std::string name = get_string(is);
  if (name != expect_name) {
    throw DataError("checkpoint: tensor order mismatch, expected \"" +
                    expect_name + "\", found \"" + name + "\"");
  }
  const std::uint64_t ndim = get_u64(is);
  std::vector<std::size_t> shape(ndim);
  for (auto& d : shape) d = get_u64(is);
  if (shape != t.shape) {
    throw DataError("checkpoint: shape mismatch for tensor \"" + name + "\"");
  }
  is.read(reinterpret_cast<char*>(t.values.data()),
          static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  if (!is) throw DataError("checkpoint: truncated tensor \"" + name + "\"");
}

LstmParams zero_lstm(std::size_t e, std::size_t h) {
  LstmParams p;
  p.input_dim = e;
  p.hidden = h;
  for (TensorPtr* w : {&p.Wi, &p.Wf, &p.Wo, &p.Wg}) {
    *w = Tensor::zeros({e, h}, true);
  }
  for (TensorPtr* u : {&p.Ui, &p.Uf, &p.Uo, &p.Ug}) {
    *u = Tensor::zeros({h, h}, true);
  }
  for (TensorPtr* b : {&p.bi, &p.bf, &p.bo, &p.bg}) {
    *b = Tensor::zeros({h}, true);
  }
  return p;
}

ScorerParams zero_scorer(std::size_t e, std::size_t h, std::size_t c) {
  ScorerParams p;
  p.encoder.fwd = zero_lstm(e, h);
  p.encoder.bwd = zero_lstm(e, h);
  p.classes = c;
  p.dense = Tensor::zeros({8 * h, c}, true);
  return p;
}

}  // namespace

std::string serialize_tensors(
    const std::vector<std::pair<std::string, TensorPtr>>& params) {
  std::ostringstream os(std::ios::binary);
  put_u64(os, params.size());
  for (const auto& [name, t] : params) put_tensor(os, name, *t);
  return os.str();
}

void save_checkpoint(const MultiDomainModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));

  nlohmann::json header{
      {"version", 1},
      {"mode", to_string(model.cfg.mode)},
      {"scheme", model.cfg.scheme},
      {"embedding_dim", model.cfg.embedding_dim},
      {"hidden", model.cfg.hidden},
      {"max_len", model.cfg.max_len},
      {"classes", model.cfg.classes},
      {"domain_names", model.cfg.domain_names},
      {"vocab", model.vocab.id_to_token},
      {"found", model.embedding.found},
      {"total", model.embedding.total},
  };
  std::vector<int> prov;
  prov.reserve(model.embedding.provenance.size());
  for (RowInit r : model.embedding.provenance) {
    prov.push_back(static_cast<int>(r));
  }
  header["provenance"] = prov;
  put_string(out, header.dump());

  auto params = model.named_params();
  put_u64(out, params.size());
  for (const auto& [name, t] : params) put_tensor(out, name, *t);
  if (!out) throw DataError("checkpoint write failed: " + path);
}

MultiDomainModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a checkpoint file: " + path);
  }

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(get_string(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header corrupt: ") + e.what());
  }

  MultiDomainModel model;
  model.cfg.mode = mode_from_string(header.at("mode").get<std::string>());
  model.cfg.scheme = header.at("scheme").get<std::string>();
  model.cfg.embedding_dim = header.at("embedding_dim").get<std::size_t>();
  model.cfg.hidden = header.at("hidden").get<std::size_t>();
  model.cfg.max_len = header.at("max_len").get<std::size_t>();
  model.cfg.classes = header.at("classes").get<std::size_t>();
  model.cfg.domain_names =
      header.at("domain_names").get<std::vector<std::string>>();

  auto tokens = header.at("vocab").get<std::vector<std::string>>();
  model.vocab.id_to_token.clear();
  model.vocab.token_to_id.clear();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    model.vocab.id_to_token.push_back(tokens[i]);
    model.vocab.token_to_id.emplace(tokens[i], static_cast<int>(i));
  }

  model.embedding.dim = model.cfg.embedding_dim;
  model.embedding.found = header.at("found").get<std::size_t>();
  model.embedding.total = header.at("total").get<std::size_t>();
  model.embedding.weights =
      Tensor::zeros({model.vocab.size(), model.cfg.embedding_dim}, true);
  model.embedding.weights->name = "embedding";
  for (int p : header.at("provenance").get<std::vector<int>>()) {
    model.embedding.provenance.push_back(static_cast<RowInit>(p));
  }
  if (model.embedding.provenance.size() != model.vocab.size()) {
    throw DataError("checkpoint: provenance length mismatch");
  }

  const std::size_t e = model.cfg.embedding_dim;
  const std::size_t h = model.cfg.hidden;
  const std::size_t c = model.cfg.classes;
  if (model.cfg.mode != Mode::domain) {
    model.generic_scorer = zero_scorer(e, h, c);
  }
  if (model.cfg.mode != Mode::generic) {
    for (std::size_t d = 0; d < model.cfg.domain_names.size(); ++d) {
      model.domain_scorers.push_back(zero_scorer(e, h, c));
    }
  }

  auto params = model.named_params();
  const std::uint64_t count = get_u64(in);
  if (count != params.size()) {
    throw DataError("checkpoint: parameter count mismatch");
  }
  for (auto& [name, t] : params) get_tensor_into(in, name, *t);
  return model;
}

}  // namespace sag
