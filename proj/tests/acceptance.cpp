// Acceptance suite: one pass/fail line per criterion, exit status nonzero
// if any criterion fails. Runs standalone (no test framework) so the
// output reads as a checklist.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "sag/checkpoint.hpp"
#include "sag/gradcheck.hpp"
#include "sag/metrics.hpp"
#include "sag/trainer.hpp"
#include "support/synthetic.hpp"

using namespace sag;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion-" << criterion << ": "
            << detail << std::endl;
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed << v;
  return os.str();
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// ---------------------------------------------------------------------------
// Straight-line scorer oracle: plain double loops written directly from the
// encoder/scorer equations, sharing nothing with the library kernels.

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void oracle_cell(const LstmParams& p, const std::vector<double>& x,
                 std::vector<double>& h, std::vector<double>& c) {
  const std::size_t e = p.input_dim, H = p.hidden;
  std::vector<double> h_prev = h, c_prev = c;
  for (std::size_t j = 0; j < H; ++j) {
    double zi = p.bi->values[j], zf = p.bf->values[j], zo = p.bo->values[j],
           zg = p.bg->values[j];
    for (std::size_t k = 0; k < e; ++k) {
      zi += x[k] * p.Wi->values[k * H + j];
      zf += x[k] * p.Wf->values[k * H + j];
      zo += x[k] * p.Wo->values[k * H + j];
      zg += x[k] * p.Wg->values[k * H + j];
    }
    for (std::size_t k = 0; k < H; ++k) {
      zi += h_prev[k] * p.Ui->values[k * H + j];
      zf += h_prev[k] * p.Uf->values[k * H + j];
      zo += h_prev[k] * p.Uo->values[k * H + j];
      zg += h_prev[k] * p.Ug->values[k * H + j];
    }
    const double i = sig(zi), f = sig(zf), o = sig(zo), g = std::tanh(zg);
    c[j] = f * c_prev[j] + i * g;
    h[j] = o * std::tanh(c[j]);
  }
}

std::vector<double> oracle_encode(const EncoderParams& p,
                                  const EmbeddingTable& table,
                                  const std::vector<int>& ids,
                                  std::size_t max_len) {
  const std::size_t e = table.dim, H = p.fwd.hidden;
  const std::size_t T = std::min(ids.size(), max_len);
  std::vector<std::vector<double>> xs(T, std::vector<double>(e));
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t row = static_cast<std::size_t>(ids[t]);
    for (std::size_t j = 0; j < e; ++j) {
      xs[t][j] = table.weights->values[row * e + j];
    }
  }
  std::vector<std::vector<double>> rows(T, std::vector<double>(2 * H));
  std::vector<double> h(H, 0.0), c(H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    oracle_cell(p.fwd, xs[t], h, c);
    for (std::size_t j = 0; j < H; ++j) rows[t][j] = h[j];
  }
  h.assign(H, 0.0);
  c.assign(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    oracle_cell(p.bwd, xs[t], h, c);
    for (std::size_t j = 0; j < H; ++j) rows[t][H + j] = h[j];
  }
  std::vector<double> pooled(2 * H, 0.0);
  for (std::size_t j = 0; j < 2 * H; ++j) {
    double best = rows[0][j];
    for (std::size_t t = 1; t < T; ++t) best = std::max(best, rows[t][j]);
    pooled[j] = best;
  }
  return pooled;
}

std::vector<double> oracle_score(const ScorerParams& p,
                                 const EmbeddingTable& table,
                                 const std::vector<int>& ref_ids,
                                 const std::vector<int>& stu_ids,
                                 std::size_t max_len) {
  const auto eR = oracle_encode(p.encoder, table, ref_ids, max_len);
  const auto eS = oracle_encode(p.encoder, table, stu_ids, max_len);
  std::vector<double> f;
  for (double v : eR) f.push_back(v);
  for (double v : eS) f.push_back(v);
  for (std::size_t i = 0; i < eR.size(); ++i) f.push_back(eR[i] * eS[i]);
  for (std::size_t i = 0; i < eR.size(); ++i) {
    f.push_back(std::abs(eR[i] - eS[i]));
  }
  std::vector<double> s(p.classes, 0.0);
  for (std::size_t c = 0; c < p.classes; ++c) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      s[c] += f[i] * p.dense->at(i, c);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

ModelConfig synth_model_cfg(Mode mode, const std::vector<std::string>& names) {
  ModelConfig mc;
  mc.embedding_dim = 16;
  mc.hidden = 16;
  mc.max_len = 8;
  mc.classes = 2;
  mc.mode = mode;
  mc.scheme = "2way";
  mc.domain_names = names;
  return mc;
}

TrainConfig synth_train_cfg(Protocol protocol, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.protocol = protocol;
  cfg.epochs = 20;
  cfg.batch_size = 32;
  cfg.seed = seed;
  cfg.max_len = 8;
  return cfg;
}

struct SynthRun {
  MultiDomainModel model;
  History history;
  double overall_macro_f1 = 0.0;
};

SynthRun run_synth(const std::vector<DomainCorpus>& corpora, Mode mode,
                   Protocol protocol, std::uint64_t seed) {
  std::vector<Sample> all;
  std::vector<std::string> names;
  for (const auto& c : corpora) {
    names.push_back(c.domain);
    all.insert(all.end(), c.train.begin(), c.train.end());
  }
  const auto scheme = LabelScheme::by_name("2way");
  SynthRun run{init_model(synth_model_cfg(mode, names), build_vocab(all),
                          std::nullopt, seed),
               {},
               0.0};
  run.history = train(run.model, corpora, synth_train_cfg(protocol, seed),
                      scheme);
  run.overall_macro_f1 =
      evaluate(run.model, corpora, scheme, Split::test).overall.scores.macro_f1;
  return run;
}

// ---------------------------------------------------------------------------

void criterion_1_gradcheck() {
  const auto t0 = std::chrono::steady_clock::now();
  auto results = run_gradcheck(42);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  std::string worst_op;
  bool all_pass = true;
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_op = r.op;
    }
  }
  report(1, all_pass && elapsed < 10.0,
         "gradient check over " + std::to_string(results.size()) +
             " ops, worst " + worst_op + " rel err " + fmt(worst) + ", " +
             fmt(elapsed) + "s (tol 1e-4, budget 10s)");
}

void criterion_2_scorer_oracle() {
  Vocab vocab;
  for (const char* w : {"w1", "w2", "w3", "w4", "w5", "w6"}) vocab.add(w);
  auto table = random_table(vocab, 3, 5);
  Rng rng(17);
  auto domain_scorer = ScorerParams::init(3, 4, 3, rng);
  auto generic_scorer = ScorerParams::init(3, 4, 3, rng);
  const auto ref_ids = vocab.encode("w1 w2 w3");
  const auto stu_ids = vocab.encode("w4 w5");

  Tape tape;
  auto got = score(tape, domain_scorer, table, ref_ids, stu_ids, 5);
  const auto expect = oracle_score(domain_scorer, table, ref_ids, stu_ids, 5);
  double worst = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    worst = std::max(worst, std::abs(got->values[c] - expect[c]));
  }

  // JMD logits are the elementwise sum of the two scorers' raw scores
  MultiDomainModel model;
  model.cfg = synth_model_cfg(Mode::jmd, {"d0"});
  model.cfg.embedding_dim = 3;
  model.cfg.hidden = 4;
  model.cfg.classes = 3;
  model.cfg.max_len = 5;
  model.vocab = vocab;
  model.embedding = table;
  model.domain_scorers.push_back(domain_scorer);
  model.generic_scorer = generic_scorer;
  auto combined = logits(tape, model, ref_ids, stu_ids, 0);
  auto sg = score(tape, generic_scorer, table, ref_ids, stu_ids, 5);
  double worst_add = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    worst_add = std::max(worst_add,
                         std::abs(combined->values[c] -
                                  (got->values[c] + sg->values[c])));
  }
  report(2, worst < 1e-12 && worst_add < 1e-12,
         "scorer vs straight-line oracle max |diff| " +
             std::to_string(worst) + "; jmd logits vs S_d+S_g max |diff| " +
             std::to_string(worst_add) + " (tol 1e-12)");
}

void criterion_3_locality() {
  synth::SyntheticSpec spec;
  spec.train_per_domain = 96;
  spec.test_per_domain = 16;
  auto corpora = synth::make_corpus(spec, 1);
  std::vector<Sample> all;
  std::vector<std::string> names;
  for (const auto& c : corpora) {
    names.push_back(c.domain);
    all.insert(all.end(), c.train.begin(), c.train.end());
  }
  auto model = init_model(synth_model_cfg(Mode::jmd, names), build_vocab(all),
                          std::nullopt, 3);
  auto cfg = synth_train_cfg(Protocol::batch, 3);
  AdamState adam;

  bool ok = true;
  std::size_t checked = 0;
  for (std::size_t d = 0; d < corpora.size() && ok; ++d) {
    auto batches = make_batches(corpora[d].train, cfg.batch_size, cfg.max_len,
                                model.vocab, cfg.seed, d);
    for (auto& batch : batches) {
      std::vector<std::string> before;
      for (std::size_t other = 0; other < model.domain_scorers.size();
           ++other) {
        if (other == d) continue;
        before.push_back(serialize_tensors(
            model.domain_scorers[other].named_params("s")));
      }
      train_on_batch(model, adam, batch, cfg);
      std::size_t i = 0;
      for (std::size_t other = 0; other < model.domain_scorers.size();
           ++other) {
        if (other == d) continue;
        ok = ok && before[i++] == serialize_tensors(
                                      model.domain_scorers[other].named_params(
                                          "s"));
      }
      ++checked;
      if (!ok) break;
    }
  }
  report(3, ok,
         "other-domain scorers byte-identical across " +
             std::to_string(checked) + " batches of a full synthetic epoch");
}

void criterion_4_and_5_synthetic() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> jmd, generic, domain_ablation;
  std::vector<double> forgetting, batch_minus_domain;
  const auto scheme = LabelScheme::by_name("2way");

  for (std::uint64_t seed : {11u, 12u, 13u}) {
    synth::SyntheticSpec spec;
    auto corpora = synth::make_corpus(spec, seed);

    auto jmd_run = run_synth(corpora, Mode::jmd, Protocol::batch, seed);
    auto gen_run = run_synth(corpora, Mode::generic, Protocol::batch, seed);
    auto dom_run = run_synth(corpora, Mode::domain, Protocol::batch, seed);
    jmd.push_back(jmd_run.overall_macro_f1);
    generic.push_back(gen_run.overall_macro_f1);
    domain_ablation.push_back(dom_run.overall_macro_f1);

    // protocol=domain on the same data: measure domain-1 dev macro-F1 right
    // after its own stage ends versus after the final stage
    auto seq_run = run_synth(corpora, Mode::jmd, Protocol::domain, seed);
    const auto& hist = seq_run.history;
    const std::size_t per_stage = hist.size() / corpora.size();
    const auto& after_d1 = hist[per_stage - 1];
    const auto& after_all = hist.back();
    const std::string dom1 = corpora[0].domain;
    auto dev_f1 = [&](const EpochRecord& rec) {
      for (const auto& dm : rec.dev_metrics->per_domain) {
        if (dm.domain == dom1) return dm.scores.macro_f1;
      }
      return 0.0;
    };
    forgetting.push_back(dev_f1(after_d1) - dev_f1(after_all));
    batch_minus_domain.push_back(jmd_run.overall_macro_f1 -
                                 seq_run.overall_macro_f1);
  }

  const double elapsed = seconds_since(t0);
  const double med_jmd = median3(jmd);
  const double med_gen = median3(generic);
  const double med_dom = median3(domain_ablation);
  const bool order_ok =
      med_jmd >= std::max(med_gen, med_dom) + 0.02 && elapsed < 300.0;
  report(4, order_ok,
         "median overall macro-F1 jmd " + fmt(med_jmd) + " vs generic " +
             fmt(med_gen) + " / domain " + fmt(med_dom) +
             " (need jmd >= max + 0.02), " + fmt(elapsed) + "s (budget 300s)");

  const double med_forget = median3(forgetting);
  const double med_gap = median3(batch_minus_domain);
  report(5, med_forget >= 0.05 && med_gap >= 0.03,
         "domain-1 dev macro-F1 drop under sequential protocol " +
             fmt(med_forget) + " (need >= 0.05); batch-vs-domain overall gap " +
             fmt(med_gap) + " (need >= 0.03)");
}

void criterion_6_semeval() {
  const char* train_env = std::getenv("SAG_SEMEVAL_TRAIN_TSV");
  const char* test_env = std::getenv("SAG_SEMEVAL_TEST_TSV");
  const std::string train_path =
      train_env ? train_env : "data/semeval/train.tsv";
  const std::string test_path = test_env ? test_env : "data/semeval/test.tsv";
  if (!std::ifstream(train_path).good() || !std::ifstream(test_path).good()) {
    report(6, false,
           "SciEntsBank TSV not found (" + train_path + ", " + test_path +
               "); the dataset cannot be fetched in this offline environment, "
               "so this criterion is reported honestly as unmet. Provide the "
               "converted TSVs via SAG_SEMEVAL_TRAIN_TSV / "
               "SAG_SEMEVAL_TEST_TSV to run it.");
    return;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto run_scheme = [&](const std::string& scheme_name, Mode mode,
                        std::uint64_t seed) {
    const auto scheme = LabelScheme::by_name(scheme_name);
    auto train_samples = parse_samples(train_path, scheme);
    auto test_samples = parse_samples(test_path, scheme);
    auto corpora = group_by_domain(train_samples, test_samples);
    std::vector<std::string> names;
    for (const auto& c : corpora) names.push_back(c.domain);
    ModelConfig mc;
    mc.embedding_dim = 50;
    mc.hidden = 32;
    mc.max_len = 50;
    mc.classes = scheme.num_classes();
    mc.mode = mode;
    mc.scheme = scheme_name;
    mc.domain_names = names;
    auto model = init_model(mc, build_vocab(train_samples), std::nullopt, seed);
    TrainConfig tc;
    tc.seed = seed;
    tc.epochs = 8;
    train(model, corpora, tc, scheme);
    return evaluate(model, corpora, scheme, Split::test).overall.scores;
  };

  std::vector<double> acc2, jmd3, gen3;
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    acc2.push_back(run_scheme("2way", Mode::jmd, seed).accuracy);
    jmd3.push_back(run_scheme("3way", Mode::jmd, seed).macro_f1);
    gen3.push_back(run_scheme("3way", Mode::generic, seed).macro_f1);
  }
  const double elapsed = seconds_since(t0);
  const double med_acc = median3(acc2);
  const double med_jmd = median3(jmd3);
  const double med_gen = median3(gen3);
  report(6,
         med_acc >= 0.70 && med_jmd >= med_gen && elapsed < 1200.0,
         "2-way accuracy " + fmt(med_acc) + " (need >= 0.70); 3-way macro-F1 "
             "jmd " + fmt(med_jmd) + " vs generic " + fmt(med_gen) + ", " +
             fmt(elapsed) + "s (budget 1200s)");
}

void criterion_7_determinism() {
  synth::SyntheticSpec spec;
  spec.train_per_domain = 96;
  spec.test_per_domain = 32;
  std::string ckpt[2], hist[2];
  for (int run = 0; run < 2; ++run) {
    auto corpora = synth::make_corpus(spec, 4);
    auto result = run_synth(corpora, Mode::jmd, Protocol::batch, 4);
    const std::string cpath = "acc_tmp_ckpt" + std::to_string(run);
    const std::string hpath = "acc_tmp_hist" + std::to_string(run);
    save_checkpoint(result.model, cpath);
    write_history(hpath, result.history);
    for (const std::string* p : {&cpath, &hpath}) {
      std::ifstream in(*p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      (p == &cpath ? ckpt : hist)[run] = ss.str();
    }
    std::remove(cpath.c_str());
    std::remove(hpath.c_str());
  }
  report(7,
         !ckpt[0].empty() && ckpt[0] == ckpt[1] && hist[0] == hist[1],
         "two identical runs: checkpoint bytes " +
             std::string(ckpt[0] == ckpt[1] ? "match" : "differ") +
             ", history bytes " +
             std::string(hist[0] == hist[1] ? "match" : "differ"));
}

void criterion_8_metrics() {
  auto cm = confusion({0, 0, 1, 1}, {0, 1, 1, 1}, 2);
  auto s = compute_metrics(cm);
  const bool hand_ok = std::abs(s.accuracy - 0.75) < 1e-12 &&
                       std::abs(s.macro_f1 - (2.0 / 3.0 + 0.8) / 2.0) < 1e-12;

  const auto five = LabelScheme::by_name("5way");
  std::set<int> excluded(five.excluded_from_macro.begin(),
                         five.excluded_from_macro.end());
  auto base = compute_metrics(confusion({0, 1, 2, 3}, {0, 1, 2, 3}, 5,
                                        excluded));
  auto with_nd = compute_metrics(
      confusion({0, 1, 2, 3, 4, 4}, {0, 1, 2, 3, 4, 1}, 5, excluded));
  const bool excl_ok = std::abs(base.macro_f1 - 1.0) < 1e-12 &&
                       with_nd.accuracy < 1.0 &&
                       std::abs(with_nd.macro_f1 -
                                (1.0 + 2.0 / 3.0 + 1.0 + 1.0) / 4.0) < 1e-12;
  report(8, hand_ok && excl_ok,
         "hand-computed macro-F1 " + fmt(s.macro_f1) +
             " (expect 0.7333) and 5-way non_domain exclusion exact");
}

}  // namespace

int main() {
  criterion_1_gradcheck();
  criterion_2_scorer_oracle();
  criterion_3_locality();
  criterion_4_and_5_synthetic();
  criterion_6_semeval();
  criterion_7_determinism();
  criterion_8_metrics();
  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                : std::to_string(g_failures) +
                                      " CRITERIA FAILED")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
