#pragma once

#include <set>
#include <string>
#include <vector>

#include "sag/model.hpp"

namespace sag {

struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<long> counts;  // rows = gold, cols = predicted
  std::set<int> excluded_from_macro;

  long& at(int gold, int pred);
  long at(int gold, int pred) const;
  long total() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

ConfusionMatrix confusion(const std::vector<int>& gold,
                          const std::vector<int>& pred, std::size_t classes,
                          std::set<int> excluded_from_macro = {});

struct Scores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
};

/// accuracy = trace/total; per-class F1 = 2PR/(P+R), 0 when P+R = 0.
/// Macro averages the classes outside excluded_from_macro; weighted-F1 is
/// the gold-support-weighted mean over classes with support > 0.
Scores compute_metrics(const ConfusionMatrix& cm);

struct DomainMetrics {
  std::string domain;
  Scores scores;
  std::size_t support = 0;
};

struct MetricsReport {
  std::vector<DomainMetrics> per_domain;
  DomainMetrics overall;  // pooled over all predictions
};

/// Evaluates each domain's chosen split with that domain's scorer id and
/// pools everything into the overall row.
MetricsReport evaluate(const MultiDomainModel& model,
                       const std::vector<DomainCorpus>& corpora,
                       const LabelScheme& scheme, Split which = Split::test);

std::string format_table(const MetricsReport& report);

/// One JSON record per row (domains then overall), for machine consumption.
std::string to_jsonl(const MetricsReport& report, const std::string& config_hash,
                     std::uint64_t seed);

}  // namespace sag
