#include "sag/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sag/rng.hpp"

namespace sag {

LabelScheme LabelScheme::by_name(const std::string& name) {
  if (name == "2way") {
    return {name, {"correct", "incorrect"}, {}};
  }
  if (name == "3way") {
    return {name, {"correct", "incorrect", "contradictory"}, {}};
  }
  if (name == "5way") {
    // non_domain is trainable but excluded from macro-F1.
    return {name,
            {"correct", "partially_correct", "contradictory", "irrelevant",
             "non_domain"},
            {4}};
  }
  if (name == "industry3") {
    return {name, {"correct", "partially_correct", "incorrect"}, {}};
  }
  throw ConfigError("unknown label scheme: " + name);
}

int LabelScheme::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == label) return static_cast<int>(i);
  }
  return -1;
}

namespace {

bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

std::string to_lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream is(to_lower(text));
  std::string word;
  while (is >> word) {
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && is_ascii_punct(word[begin])) ++begin;
    while (end > begin && is_ascii_punct(word[end - 1])) --end;
    for (std::size_t i = 0; i < begin; ++i) tokens.emplace_back(1, word[i]);
    if (end > begin) tokens.push_back(word.substr(begin, end - begin));
    for (std::size_t i = end; i < word.size(); ++i) {
      tokens.emplace_back(1, word[i]);
    }
  }
  return tokens;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

const std::vector<std::string> kHeader = {"domain",    "question_id",
                                          "question",  "reference",
                                          "student",   "label"};

}  // namespace

std::vector<Sample> parse_samples(const std::string& path,
                                  const LabelScheme& scheme) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty corpus file: " + path);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_tabs(line) != kHeader) {
    throw DataError(path + ": bad header, expected " +
                    "domain\\tquestion_id\\tquestion\\treference\\tstudent"
                    "\\tlabel");
  }

  std::vector<Sample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != kHeader.size()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(kHeader.size()) + " columns, got " +
                      std::to_string(fields.size()));
    }
    int label = scheme.index_of(fields[5]);
    if (label < 0) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": unknown label \"" + fields[5] + "\" for scheme " +
                       scheme.name);
    }
    Sample s{fields[0], fields[1], fields[2], fields[3], fields[4], label};
    if (tokenize(s.reference).empty() || tokenize(s.student).empty()) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": reference and student answers must tokenize to at "
                       "least one token");
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

namespace {

void fill_domains(std::vector<DomainCorpus>& corpora,
                  const std::vector<Sample>& samples, Split which) {
  auto find = [&](const std::string& d) -> DomainCorpus& {
    for (auto& c : corpora) {
      if (c.domain == d) return c;
    }
    corpora.push_back(DomainCorpus{d, {}, {}, {}});
    return corpora.back();
  };
  for (const auto& s : samples) {
    auto& c = find(s.domain);
    switch (which) {
      case Split::train: c.train.push_back(s); break;
      case Split::test: c.test.push_back(s); break;
      case Split::dev: c.dev.push_back(s); break;
    }
  }
}

}  // namespace

std::vector<DomainCorpus> parse_corpus(const std::string& path,
                                       const LabelScheme& scheme,
                                       Split which) {
  auto samples = parse_samples(path, scheme);
  std::vector<DomainCorpus> corpora;
  fill_domains(corpora, samples, which);
  return corpora;
}

std::vector<DomainCorpus> group_by_domain(const std::vector<Sample>& train,
                                          const std::vector<Sample>& test,
                                          const std::vector<Sample>& dev) {
  std::vector<DomainCorpus> corpora;
  fill_domains(corpora, train, Split::train);
  fill_domains(corpora, test, Split::test);
  fill_domains(corpora, dev, Split::dev);
  return corpora;
}

void write_samples(const std::string& path, const std::vector<Sample>& samples,
                   const LabelScheme& scheme) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  out << "domain\tquestion_id\tquestion\treference\tstudent\tlabel\n";
  for (const auto& s : samples) {
    out << s.domain << '\t' << s.question_id << '\t' << s.question << '\t'
        << s.reference << '\t' << s.student << '\t'
        << scheme.classes.at(static_cast<std::size_t>(s.label)) << '\n';
  }
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_per_question(
    const std::vector<Sample>& samples, double ratio, std::uint64_t seed) {
  if (ratio <= 0.0 || ratio >= 1.0) {
    throw ConfigError("split ratio must lie in (0, 1)");
  }
  // Question groups in first-appearance order keep the split deterministic.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto key = samples[i].domain + "\x1f" + samples[i].question_id;
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(i);
  }

  std::vector<bool> in_train(samples.size(), true);
  Rng rng(seed);
  for (const auto& key : order) {
    auto idx = groups[key];
    rng.shuffle(idx);
    std::size_t n_train = static_cast<std::size_t>(
        std::ceil(ratio * static_cast<double>(idx.size())));
    for (std::size_t j = n_train; j < idx.size(); ++j) in_train[idx[j]] = false;
  }

  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (in_train[i] ? out.first : out.second).push_back(samples[i]);
  }
  return out;
}

}  // namespace sag
