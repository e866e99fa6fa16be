#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sag/errors.hpp"

namespace sag {

/// One graded answer pair. The question text is carried as metadata only;
/// scoring consumes just the reference and student answers.
struct Sample {
  std::string domain;
  std::string question_id;
  std::string question;
  std::string reference;
  std::string student;
  int label = 0;
};

struct LabelScheme {
  std::string name;
  std::vector<std::string> classes;
  std::vector<int> excluded_from_macro;

  static LabelScheme by_name(const std::string& name);

  int index_of(const std::string& label) const;  // -1 when unknown
  std::size_t num_classes() const { return classes.size(); }
};

struct DomainCorpus {
  std::string domain;
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::vector<Sample> dev;
};

/// Lowercases, splits on whitespace, and peels leading/trailing ASCII
/// punctuation into separate tokens.
std::vector<std::string> tokenize(const std::string& text);

/// Reads the canonical TSV (header: domain, question_id, question,
/// reference, student, label). Labels are validated against the scheme.
std::vector<Sample> parse_samples(const std::string& path,
                                  const LabelScheme& scheme);

/// Groups parsed samples into one corpus per distinct domain, preserving
/// first-appearance order. `which` selects the slot the samples fill.
enum class Split { train, test, dev };
std::vector<DomainCorpus> parse_corpus(const std::string& path,
                                       const LabelScheme& scheme,
                                       Split which = Split::train);

/// Merges per-split sample lists into domain corpora.
std::vector<DomainCorpus> group_by_domain(const std::vector<Sample>& train,
                                          const std::vector<Sample>& test,
                                          const std::vector<Sample>& dev = {});

void write_samples(const std::string& path, const std::vector<Sample>& samples,
                   const LabelScheme& scheme);

/// Within each question, a seeded shuffle sends ceil(ratio*n) student
/// answers to train and the rest to test. Output preserves input order.
std::pair<std::vector<Sample>, std::vector<Sample>> split_per_question(
    const std::vector<Sample>& samples, double ratio, std::uint64_t seed);

}  // namespace sag
