#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sag/checkpoint.hpp"
#include "sag/config.hpp"
#include "sag/data.hpp"
#include "sag/gradcheck.hpp"
#include "sag/metrics.hpp"
#include "sag/model.hpp"
#include "sag/semeval.hpp"
#include "sag/trainer.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitGeneric = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string default_run_dir() {
  if (const char* env = std::getenv("SAG_RUN_DIR")) return env;
  return "run";
}

// Flags that were actually passed override the config file, which in turn
// overrides the built-in defaults. Flag values are fed through
// RunConfig::set so file and flag parsing share one code path.
struct Overrides {
  CLI::App* cmd = nullptr;
  std::string config_file;

  void attach(CLI::App* app) {
    cmd = app;
    app->add_option("--config", config_file, "key=value config file");
    opt("--mode", "mode", "jmd | generic | domain");
    opt("--scheme", "scheme", "2way | 3way | 5way | industry3");
    opt("--embedding-dim", "embedding_dim", "word vector width");
    opt("--hidden", "hidden", "LSTM hidden units per direction");
    opt("--max-len", "max_len", "token truncation length");
    opt("--min-count", "min_count", "vocabulary frequency cutoff");
    opt("--protocol", "protocol", "batch | epoch | domain");
    opt("--epochs", "epochs", "training epochs");
    opt("--batch-size", "batch_size", "examples per batch");
    opt("--lr", "lr", "Adam learning rate");
    opt("--beta1", "beta1", "Adam beta1");
    opt("--beta2", "beta2", "Adam beta2");
    opt("--eps", "eps", "Adam epsilon");
    opt("--seed", "seed", "RNG seed");
    opt("--clip-norm", "clip_norm", "global gradient norm cap, 0 = off");
    opt("--train", "train_path", "training TSV");
    opt("--test", "test_path", "test TSV");
    opt("--dev", "dev_path", "dev TSV (per-epoch metrics)");
    opt("--embeddings", "embedding_path", "pretrained vectors, text format");
    opt("--checkpoint", "checkpoint_path", "checkpoint file");
    opt("--history", "history_path", "training history JSONL");
    opt("--report", "report_path", "metrics report JSONL");
    opt("--run-dir", "run_dir", "artifact directory (env SAG_RUN_DIR)");
  }

  sag::RunConfig resolve() const {
    sag::RunConfig cfg;
    if (!config_file.empty()) cfg = sag::RunConfig::from_file(config_file);
    for (const auto& [key, option] : opts_) {
      if (option->count() > 0) cfg.set(key, option->results().back());
    }
    if (cfg.run_dir.empty()) cfg.run_dir = default_run_dir();
    return cfg;
  }

 private:
  void opt(const std::string& flag, const std::string& key,
           const std::string& help) {
    opts_.emplace_back(key, cmd->add_option(flag, help));
  }

  std::vector<std::pair<std::string, CLI::Option*>> opts_;
};

int cmd_train(const sag::RunConfig& cfg) {
  if (cfg.train_path.empty()) {
    throw sag::ConfigError("train: --train TSV is required");
  }
  const auto scheme = sag::LabelScheme::by_name(cfg.scheme);
  const auto train_samples = sag::parse_samples(cfg.train_path, scheme);
  std::vector<sag::Sample> dev_samples;
  if (!cfg.dev_path.empty()) {
    dev_samples = sag::parse_samples(cfg.dev_path, scheme);
  }
  auto corpora = sag::group_by_domain(train_samples, {}, dev_samples);

  std::vector<std::string> domain_names;
  for (const auto& c : corpora) domain_names.push_back(c.domain);

  const auto vocab = sag::build_vocab(train_samples, cfg.min_count);
  const auto mc = cfg.model_config(scheme.num_classes(), domain_names);
  std::optional<std::string> pretrained;
  if (!cfg.embedding_path.empty()) pretrained = cfg.embedding_path;
  auto model = sag::init_model(mc, vocab, pretrained, cfg.seed);
  if (pretrained) {
    std::cerr << "embeddings: " << model.embedding.found << "/"
              << model.embedding.total << " vocabulary tokens found\n";
  }

  const auto history = sag::train(model, corpora, cfg.train_config(), scheme);

  sag::echo_config(cfg, cfg.run_dir);
  const std::string ckpt = cfg.checkpoint_path.empty()
                               ? (fs::path(cfg.run_dir) / "model.ckpt").string()
                               : cfg.checkpoint_path;
  const std::string hist = cfg.history_path.empty()
                               ? (fs::path(cfg.run_dir) / "history.jsonl").string()
                               : cfg.history_path;
  sag::save_checkpoint(model, ckpt);
  sag::write_history(hist, history);
  std::cout << "checkpoint: " << ckpt << "\nhistory: " << hist << "\n";
  if (!history.empty() && !history.back().domain_loss.empty()) {
    std::cout << "final losses:";
    for (const auto& [d, loss] : history.back().domain_loss) {
      std::cout << " " << d << "=" << loss;
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_eval(const sag::RunConfig& cfg, const Overrides& ov) {
  if (cfg.checkpoint_path.empty() || cfg.test_path.empty()) {
    throw sag::ConfigError("eval: --checkpoint and --test are required");
  }
  auto model = sag::load_checkpoint(cfg.checkpoint_path);
  if (ov.cmd->count("--scheme") > 0 && cfg.scheme != model.cfg.scheme) {
    throw sag::ConfigError("eval: checkpoint was trained with scheme \"" +
                           model.cfg.scheme + "\", got \"" + cfg.scheme + "\"");
  }
  const auto scheme = sag::LabelScheme::by_name(model.cfg.scheme);
  const auto corpora =
      sag::parse_corpus(cfg.test_path, scheme, sag::Split::test);
  const auto report = sag::evaluate(model, corpora, scheme, sag::Split::test);
  std::cout << sag::format_table(report);
  if (!cfg.report_path.empty()) {
    std::ofstream out(cfg.report_path);
    if (!out) throw sag::DataError("cannot write " + cfg.report_path);
    out << sag::to_jsonl(report, cfg.hash(), cfg.seed);
  }
  return 0;
}

int cmd_predict(const sag::RunConfig& cfg, const std::string& reference,
                const std::string& student, const std::string& domain) {
  if (cfg.checkpoint_path.empty()) {
    throw sag::ConfigError("predict: --checkpoint is required");
  }
  auto model = sag::load_checkpoint(cfg.checkpoint_path);
  const auto scheme = sag::LabelScheme::by_name(model.cfg.scheme);

  sag::Sample sample;
  sample.domain = domain;
  sample.reference = reference;
  sample.student = student;
  sample.label = 0;
  const int pred = sag::predict(model, sample, &std::cerr);

  sag::NoGradGuard guard(model);
  sag::Tape tape;
  const auto ref_ids = model.vocab.encode(reference, model.cfg.max_len);
  const auto stu_ids = model.vocab.encode(student, model.cfg.max_len);
  const auto probs = sag::forward(tape, model, ref_ids, stu_ids,
                                  model.domain_index(domain));
  for (std::size_t c = 0; c < scheme.num_classes(); ++c) {
    std::cout << scheme.classes[c] << "\t" << probs->values[c] << "\n";
  }
  std::cout << "label\t" << scheme.classes[pred] << "\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, double tol) {
  const auto results = sag::run_gradcheck(seed, tol);
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "pass" : "FAIL") << "\t" << r.op << "\tmax_rel_err="
              << r.max_rel_err << "\n";
    all_pass = all_pass && r.pass;
  }
  if (!all_pass) {
    std::cerr << "gradcheck: at least one op exceeded tolerance " << tol
              << "\n";
    return kExitNumeric;
  }
  return 0;
}

int cmd_split(const std::string& input, const std::string& scheme_name,
              double ratio, std::uint64_t seed, const std::string& train_out,
              const std::string& test_out) {
  const auto scheme = sag::LabelScheme::by_name(scheme_name);
  const auto samples = sag::parse_samples(input, scheme);
  auto [train, test] = sag::split_per_question(samples, ratio, seed);
  sag::write_samples(train_out, train, scheme);
  sag::write_samples(test_out, test, scheme);
  {
    std::ofstream manifest(train_out + ".manifest");
    manifest << "input=" << input << "\nratio=" << ratio << "\nseed=" << seed
             << "\ntrain=" << train_out << "\ntest=" << test_out << "\n";
  }
  std::cout << "train: " << train.size() << " samples -> " << train_out
            << "\ntest: " << test.size() << " samples -> " << test_out << "\n";
  return 0;
}

int cmd_convert(const std::string& input, const std::string& output,
                const std::string& scheme_name) {
  const auto scheme = sag::LabelScheme::by_name(scheme_name);
  const std::size_t n = sag::convert_semeval_dir(input, output, scheme);
  std::cout << n << " samples -> " << output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-domain short-answer grading toolkit"};
  app.require_subcommand(1);

  Overrides train_ov, eval_ov, predict_ov;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_ov.attach(train_cmd);
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_ov.attach(eval_cmd);
  auto* predict_cmd = app.add_subcommand("predict", "score one answer pair");
  predict_ov.attach(predict_cmd);
  std::string reference, student, domain;
  predict_cmd->add_option("--reference", reference, "reference answer")
      ->required();
  predict_cmd->add_option("--student", student, "student answer")->required();
  predict_cmd->add_option("--domain", domain, "domain name");

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference suite");
  std::uint64_t grad_seed = 42;
  double grad_tol = 1e-4;
  grad_cmd->add_option("--seed", grad_seed, "RNG seed");
  grad_cmd->add_option("--tol", grad_tol, "max relative error allowed");

  auto* split_cmd = app.add_subcommand("split", "per-question train/test split");
  std::string split_in, split_train = "train.tsv", split_test = "test.tsv";
  std::string split_scheme = "3way";
  double split_ratio = 0.8;
  std::uint64_t split_seed = 42;
  split_cmd->add_option("--input", split_in, "input TSV")->required();
  split_cmd->add_option("--scheme", split_scheme, "label scheme");
  split_cmd->add_option("--ratio", split_ratio, "train fraction per question");
  split_cmd->add_option("--seed", split_seed, "RNG seed");
  split_cmd->add_option("--train-out", split_train, "train TSV output");
  split_cmd->add_option("--test-out", split_test, "test TSV output");

  auto* conv_cmd =
      app.add_subcommand("convert-semeval", "question XML directory -> TSV");
  std::string conv_in, conv_out = "semeval.tsv", conv_scheme = "5way";
  conv_cmd->add_option("--input", conv_in, "directory of question XML files")
      ->required();
  conv_cmd->add_option("--output", conv_out, "TSV output");
  conv_cmd->add_option("--scheme", conv_scheme, "2way | 3way | 5way");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(train_ov.resolve());
    if (eval_cmd->parsed()) return cmd_eval(eval_ov.resolve(), eval_ov);
    if (predict_cmd->parsed()) {
      return cmd_predict(predict_ov.resolve(), reference, student, domain);
    }
    if (grad_cmd->parsed()) return cmd_gradcheck(grad_seed, grad_tol);
    if (split_cmd->parsed()) {
      return cmd_split(split_in, split_scheme, split_ratio, split_seed,
                       split_train, split_test);
    }
    if (conv_cmd->parsed()) return cmd_convert(conv_in, conv_out, conv_scheme);
  } catch (const sag::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sag::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const sag::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGeneric;
  }
  return kExitGeneric;
}
