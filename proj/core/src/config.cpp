#include "sag/config.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace sag {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out;
  is >> out;
  if (is.fail() || !is.eof()) {
    throw ConfigError("config key \"" + key + "\": cannot parse value \"" +
                      value + "\"");
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "mode") mode = value;
  else if (key == "scheme") scheme = value;
  else if (key == "embedding_dim") embedding_dim = parse_number<std::size_t>(key, value);
  else if (key == "hidden") hidden = parse_number<std::size_t>(key, value);
  else if (key == "max_len") max_len = parse_number<std::size_t>(key, value);
  else if (key == "min_count") min_count = parse_number<int>(key, value);
  else if (key == "protocol") protocol = value;
  else if (key == "epochs") epochs = parse_number<int>(key, value);
  else if (key == "batch_size") batch_size = parse_number<std::size_t>(key, value);
  else if (key == "lr") lr = parse_number<double>(key, value);
  else if (key == "beta1") beta1 = parse_number<double>(key, value);
  else if (key == "beta2") beta2 = parse_number<double>(key, value);
  else if (key == "eps") eps = parse_number<double>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "clip_norm") clip_norm = parse_number<double>(key, value);
  else if (key == "train_path") train_path = value;
  else if (key == "test_path") test_path = value;
  else if (key == "dev_path") dev_path = value;
  else if (key == "embedding_path") embedding_path = value;
  else if (key == "checkpoint_path") checkpoint_path = value;
  else if (key == "history_path") history_path = value;
  else if (key == "report_path") report_path = value;
  else if (key == "run_dir") run_dir = value;
  else throw ConfigError("unknown config key \"" + key + "\"");
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  os << "mode=" << mode << "\n"
     << "scheme=" << scheme << "\n"
     << "embedding_dim=" << embedding_dim << "\n"
     << "hidden=" << hidden << "\n"
     << "max_len=" << max_len << "\n"
     << "min_count=" << min_count << "\n"
     << "protocol=" << protocol << "\n"
     << "epochs=" << epochs << "\n"
     << "batch_size=" << batch_size << "\n"
     << "lr=" << fmt(lr) << "\n"
     << "beta1=" << fmt(beta1) << "\n"
     << "beta2=" << fmt(beta2) << "\n"
     << "eps=" << fmt(eps) << "\n"
     << "seed=" << seed << "\n"
     << "clip_norm=" << fmt(clip_norm) << "\n"
     << "train_path=" << train_path << "\n"
     << "test_path=" << test_path << "\n"
     << "dev_path=" << dev_path << "\n"
     << "embedding_path=" << embedding_path << "\n"
     << "checkpoint_path=" << checkpoint_path << "\n"
     << "history_path=" << history_path << "\n"
     << "report_path=" << report_path << "\n"
     << "run_dir=" << run_dir << "\n";
  return os.str();
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key=value");
    }
    cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

std::string RunConfig::hash() const {
  const std::uint64_t h = std::hash<std::string>{}(serialize());
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

ModelConfig RunConfig::model_config(std::size_t classes,
                                    std::vector<std::string> domain_names) const {
  ModelConfig mc;
  mc.embedding_dim = embedding_dim;
  mc.hidden = hidden;
  mc.max_len = max_len;
  mc.classes = classes;
  mc.mode = mode_from_string(mode);
  mc.scheme = scheme;
  mc.domain_names = std::move(domain_names);
  mc.validate();
  return mc;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig tc;
  tc.protocol = protocol_from_string(protocol);
  tc.epochs = epochs;
  tc.batch_size = batch_size;
  tc.lr = lr;
  tc.beta1 = beta1;
  tc.beta2 = beta2;
  tc.eps = eps;
  tc.seed = seed;
  tc.max_len = max_len;
  if (clip_norm > 0.0) tc.clip_norm = clip_norm;
  tc.validate();
  return tc;
}

void echo_config(const RunConfig& cfg, const std::string& run_dir) {
  std::filesystem::create_directories(run_dir);
  const auto path = std::filesystem::path(run_dir) / "effective-config.txt";
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << cfg.serialize();
}

}  // namespace sag
