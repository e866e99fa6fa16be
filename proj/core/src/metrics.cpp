#include "sag/metrics.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace sag {

long& ConfusionMatrix::at(int gold, int pred) {
  return counts[static_cast<std::size_t>(gold) * classes +
                static_cast<std::size_t>(pred)];
}

long ConfusionMatrix::at(int gold, int pred) const {
  return counts[static_cast<std::size_t>(gold) * classes +
                static_cast<std::size_t>(pred)];
}

long ConfusionMatrix::total() const {
  long t = 0;
  for (long c : counts) t += c;
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (classes != other.classes) {
    throw DimensionError("confusion matrix class counts disagree");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

ConfusionMatrix confusion(const std::vector<int>& gold,
                          const std::vector<int>& pred, std::size_t classes,
                          std::set<int> excluded_from_macro) {
  if (gold.size() != pred.size()) {
    throw DimensionError("confusion: gold and pred lengths differ");
  }
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(classes * classes, 0);
  cm.excluded_from_macro = std::move(excluded_from_macro);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || static_cast<std::size_t>(gold[i]) >= classes ||
        pred[i] < 0 || static_cast<std::size_t>(pred[i]) >= classes) {
      throw DimensionError("confusion: class id out of range");
    }
    ++cm.at(gold[i], pred[i]);
  }
  return cm;
}

Scores compute_metrics(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total == 0) throw DimensionError("compute_metrics on an empty confusion matrix");
  const std::size_t c = cm.classes;

  long trace = 0;
  std::vector<long> gold_support(c, 0), pred_support(c, 0), tp(c, 0);
  for (std::size_t g = 0; g < c; ++g) {
    for (std::size_t p = 0; p < c; ++p) {
      const long n = cm.at(static_cast<int>(g), static_cast<int>(p));
      gold_support[g] += n;
      pred_support[p] += n;
      if (g == p) {
        trace += n;
        tp[g] = n;
      }
    }
  }

  std::vector<double> f1(c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    const double denom =
        static_cast<double>(pred_support[i] + gold_support[i]);
    if (denom > 0.0) f1[i] = 2.0 * static_cast<double>(tp[i]) / denom;
  }

  Scores s;
  s.accuracy = static_cast<double>(trace) / static_cast<double>(total);

  std::size_t macro_n = 0;
  for (std::size_t i = 0; i < c; ++i) {
    if (cm.excluded_from_macro.count(static_cast<int>(i))) continue;
    s.macro_f1 += f1[i];
    ++macro_n;
  }
  if (macro_n > 0) s.macro_f1 /= static_cast<double>(macro_n);

  long weighted_support = 0;
  for (std::size_t i = 0; i < c; ++i) {
    if (gold_support[i] == 0) continue;
    s.weighted_f1 += f1[i] * static_cast<double>(gold_support[i]);
    weighted_support += gold_support[i];
  }
  if (weighted_support > 0) {
    s.weighted_f1 /= static_cast<double>(weighted_support);
  }
  return s;
}

MetricsReport evaluate(const MultiDomainModel& model,
                       const std::vector<DomainCorpus>& corpora,
                       const LabelScheme& scheme, Split which) {
  MetricsReport report;
  std::set<int> excluded(scheme.excluded_from_macro.begin(),
                         scheme.excluded_from_macro.end());
  ConfusionMatrix pooled;
  pooled.classes = scheme.num_classes();
  pooled.counts.assign(pooled.classes * pooled.classes, 0);
  pooled.excluded_from_macro = excluded;

  for (const auto& corpus : corpora) {
    const auto& samples = which == Split::test
                              ? corpus.test
                              : (which == Split::dev ? corpus.dev
                                                     : corpus.train);
    if (samples.empty()) continue;
    const int domain_idx = model.domain_index(corpus.domain);
    auto pred = predict_batch(model, samples, domain_idx);
    std::vector<int> gold;
    gold.reserve(samples.size());
    for (const auto& s : samples) gold.push_back(s.label);
    auto cm = confusion(gold, pred, scheme.num_classes(), excluded);
    pooled += cm;
    report.per_domain.push_back(
        {corpus.domain, compute_metrics(cm), samples.size()});
  }
  if (pooled.total() == 0) throw DataError("evaluate: no test samples");
  report.overall = {"overall", compute_metrics(pooled),
                    static_cast<std::size_t>(pooled.total())};
  return report;
}

std::string format_table(const MetricsReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "domain" << std::right << std::setw(9)
     << "support" << std::setw(10) << "acc" << std::setw(10) << "m-f1"
     << std::setw(10) << "w-f1" << "\n";
  auto row = [&](const DomainMetrics& m) {
    os << std::left << std::setw(16) << m.domain << std::right << std::setw(9)
       << m.support << std::fixed << std::setprecision(4) << std::setw(10)
       << m.scores.accuracy << std::setw(10) << m.scores.macro_f1
       << std::setw(10) << m.scores.weighted_f1 << "\n";
  };
  for (const auto& m : report.per_domain) row(m);
  row(report.overall);
  return os.str();
}

std::string to_jsonl(const MetricsReport& report,
                     const std::string& config_hash, std::uint64_t seed) {
  std::ostringstream os;
  auto line = [&](const DomainMetrics& m) {
    nlohmann::json j{{"domain", m.domain},
                     {"support", m.support},
                     {"accuracy", m.scores.accuracy},
                     {"macro_f1", m.scores.macro_f1},
                     {"weighted_f1", m.scores.weighted_f1},
                     {"config_hash", config_hash},
                     {"seed", seed}};
    os << j.dump() << "\n";
  };
  for (const auto& m : report.per_domain) line(m);
  line(report.overall);
  return os.str();
}

}  // namespace sag
