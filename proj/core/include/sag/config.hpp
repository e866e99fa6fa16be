#pragma once

#include <cstdint>
#include <string>

#include "sag/model.hpp"
#include "sag/trainer.hpp"

namespace sag {

/// Flat run configuration shared by the CLI commands. Round-trips through a
/// plain key=value file; unset path fields stay empty. Precedence is
/// flags > config file > built-in defaults.
struct RunConfig {
  // model
  std::string mode = "jmd";
  std::string scheme = "3way";
  std::size_t embedding_dim = 300;
  std::size_t hidden = 100;
  std::size_t max_len = 50;
  int min_count = 1;

  // training
  std::string protocol = "batch";
  int epochs = 15;
  std::size_t batch_size = 32;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 42;
  double clip_norm = 0.0;  // 0 disables clipping

  // paths
  std::string train_path;
  std::string test_path;
  std::string dev_path;
  std::string embedding_path;
  std::string checkpoint_path;
  std::string history_path;
  std::string report_path;
  std::string run_dir;

  /// Assigns one key from its textual value. Unknown keys and unparsable
  /// values raise ConfigError.
  void set(const std::string& key, const std::string& value);

  /// All keys in fixed order, one `key=value` per line.
  std::string serialize() const;

  /// Parses a key=value file ('#' comments and blank lines allowed) on top
  /// of the built-in defaults.
  static RunConfig from_file(const std::string& path);

  /// Short hex digest of the serialized form, for tagging reports.
  std::string hash() const;

  ModelConfig model_config(std::size_t classes,
                           std::vector<std::string> domain_names) const;
  TrainConfig train_config() const;
};

/// Writes the effective config into `run_dir/effective-config.txt`,
/// creating the directory if needed.
void echo_config(const RunConfig& cfg, const std::string& run_dir);

}  // namespace sag
