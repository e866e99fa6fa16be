#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sag/config.hpp"

using namespace sag;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("test_tmp_" + name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("defaults carry the documented training recipe") {
  RunConfig cfg;
  CHECK(cfg.embedding_dim == 300);
  CHECK(cfg.hidden == 100);
  CHECK(cfg.max_len == 50);
  CHECK(cfg.batch_size == 32);
  CHECK(cfg.epochs == 15);
  CHECK(cfg.lr == 0.001);
  CHECK(cfg.mode == "jmd");
  CHECK(cfg.protocol == "batch");
}

TEST_CASE("config file overrides defaults, unknown keys rejected") {
  TempFile f("run.cfg",
             "# comment line\n"
             "\n"
             "mode = generic\n"
             "epochs=3\n"
             "lr = 0.01\n"
             "train_path = data/train.tsv\n");
  auto cfg = RunConfig::from_file(f.path);
  CHECK(cfg.mode == "generic");
  CHECK(cfg.epochs == 3);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.train_path == "data/train.tsv");
  CHECK(cfg.batch_size == 32);  // untouched default

  RunConfig direct;
  CHECK_THROWS_AS(direct.set("no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(direct.set("epochs", "three"), ConfigError);

  TempFile bad("bad.cfg", "just a line without equals\n");
  CHECK_THROWS_AS(RunConfig::from_file(bad.path), ConfigError);
}

TEST_CASE("serialize then re-parse is lossless") {
  RunConfig cfg;
  cfg.mode = "domain";
  cfg.seed = 987;
  cfg.lr = 0.0025;
  cfg.train_path = "a/b.tsv";
  TempFile f("echo.cfg", cfg.serialize());
  auto back = RunConfig::from_file(f.path);
  CHECK(back.serialize() == cfg.serialize());
  CHECK(back.hash() == cfg.hash());
  RunConfig other;
  CHECK(other.hash() != cfg.hash());
}

TEST_CASE("echo_config writes the effective config into the run dir") {
  RunConfig cfg;
  cfg.seed = 5;
  const std::string dir = "test_tmp_rundir";
  echo_config(cfg, dir);
  std::ifstream in(dir + "/effective-config.txt");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == cfg.serialize());
  in.close();
  std::filesystem::remove_all(dir);
}

TEST_CASE("derived model and train configs reflect the fields") {
  RunConfig cfg;
  cfg.mode = "jmd";
  cfg.scheme = "3way";
  cfg.clip_norm = 2.5;
  auto mc = cfg.model_config(3, {"d0", "d1"});
  CHECK(mc.classes == 3);
  CHECK(mc.mode == Mode::jmd);
  CHECK(mc.domain_names.size() == 2);
  auto tc = cfg.train_config();
  CHECK(tc.protocol == Protocol::batch);
  REQUIRE(tc.clip_norm.has_value());
  CHECK(*tc.clip_norm == 2.5);

  cfg.mode = "nonsense";
  CHECK_THROWS_AS(cfg.model_config(3, {"d0"}), ConfigError);
  cfg.mode = "jmd";
  cfg.protocol = "sometimes";
  CHECK_THROWS_AS(cfg.train_config(), ConfigError);
}
