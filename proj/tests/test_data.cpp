#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "doctest.h"
#include "sag/batching.hpp"
#include "sag/data.hpp"
#include "sag/rng.hpp"

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

const char* kHeader = "domain\tquestion_id\tquestion\treference\tstudent\tlabel\n";

Sample mk(const std::string& domain, const std::string& qid,
          const std::string& stu, int label = 0) {
  Sample s;
  s.domain = domain;
  s.question_id = qid;
  s.question = "why";
  s.reference = "the reference answer";
  s.student = stu;
  s.label = label;
  return s;
}

}  // namespace

TEST_CASE("label schemes carry the documented classes") {
  auto two = LabelScheme::by_name("2way");
  CHECK(two.classes == std::vector<std::string>{"correct", "incorrect"});
  auto three = LabelScheme::by_name("3way");
  CHECK(three.classes ==
        std::vector<std::string>{"correct", "incorrect", "contradictory"});
  auto five = LabelScheme::by_name("5way");
  CHECK(five.classes ==
        std::vector<std::string>{"correct", "partially_correct", "contradictory",
                                 "irrelevant", "non_domain"});
  CHECK(five.excluded_from_macro == std::vector<int>{4});
  auto ind = LabelScheme::by_name("industry3");
  CHECK(ind.classes ==
        std::vector<std::string>{"correct", "partially_correct", "incorrect"});
  CHECK_THROWS_AS(LabelScheme::by_name("7way"), ConfigError);
  CHECK(two.index_of("incorrect") == 1);
  CHECK(two.index_of("maybe") == -1);
}

TEST_CASE("tokenize lowercases, splits, and peels edge punctuation") {
  CHECK(tokenize("The pitch would be higher!") ==
        std::vector<std::string>{"the", "pitch", "would", "be", "higher", "!"});
  CHECK(tokenize("X runs.") == std::vector<std::string>{"x", "runs", "."});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("  spaced   out  ") ==
        std::vector<std::string>{"spaced", "out"});
  CHECK(tokenize("\"quoted\"") == std::vector<std::string>{"\"", "quoted", "\""});
  // interior punctuation stays put
  CHECK(tokenize("it's co-located") ==
        std::vector<std::string>{"it's", "co-located"});
}

TEST_CASE("tokenize round-trips punctuation-free text") {
  Rng rng(3);
  const std::vector<std::string> pool{"alpha", "beta", "gamma", "x1", "z"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> words;
    const std::size_t n = 1 + rng.next_below(8);
    for (std::size_t i = 0; i < n; ++i) {
      words.push_back(pool[rng.next_below(pool.size())]);
    }
    std::string joined;
    for (const auto& w : words) {
      if (!joined.empty()) joined += ' ';
      joined += w;
    }
    CHECK(tokenize(joined) == words);
  }
}

TEST_CASE("parse_samples reads the canonical TSV") {
  TempFile f("parse.tsv",
             std::string(kHeader) +
                 "A\tq1\tWhy?\tBecause heat rises\theat goes up\tcorrect\n"
                 "B\tq2\tHow?\tBy conduction\tno idea\tincorrect\n");
  auto samples = parse_samples(f.path, LabelScheme::by_name("2way"));
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].domain == "A");
  CHECK(samples[0].question_id == "q1");
  CHECK(samples[0].reference == "Because heat rises");
  CHECK(samples[0].label == 0);
  CHECK(samples[1].label == 1);
}

TEST_CASE("unknown label errors with the line number") {
  TempFile f("badlabel.tsv", std::string(kHeader) +
                                 "A\tq1\tQ\tref text\tstu text\tmaybe\n");
  try {
    parse_samples(f.path, LabelScheme::by_name("2way"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
    CHECK(std::string(e.what()).find("maybe") != std::string::npos);
  }
}

TEST_CASE("missing column is a schema error") {
  TempFile f("badcols.tsv",
             std::string(kHeader) + "A\tq1\tQ\tref text\tcorrect\n");
  CHECK_THROWS_AS(parse_samples(f.path, LabelScheme::by_name("2way")),
                  DataError);
}

TEST_CASE("bad header is a schema error") {
  TempFile f("badhead.tsv", "domain\tquestion\tstudent\tlabel\nA\tQ\ts\tcorrect\n");
  CHECK_THROWS_AS(parse_samples(f.path, LabelScheme::by_name("2way")),
                  DataError);
}

TEST_CASE("parse_corpus groups by domain preserving first-appearance order") {
  TempFile f("corpus.tsv",
             std::string(kHeader) +
                 "B\tq1\tQ\tref one\tstu one\tcorrect\n"
                 "A\tq2\tQ\tref two\tstu two\tincorrect\n"
                 "B\tq3\tQ\tref three\tstu three\tcorrect\n");
  auto corpora = parse_corpus(f.path, LabelScheme::by_name("2way"));
  REQUIRE(corpora.size() == 2);
  CHECK(corpora[0].domain == "B");
  CHECK(corpora[0].train.size() == 2);
  CHECK(corpora[1].domain == "A");
  CHECK(corpora[1].train.size() == 1);

  auto as_test = parse_corpus(f.path, LabelScheme::by_name("2way"), Split::test);
  CHECK(as_test[0].train.empty());
  CHECK(as_test[0].test.size() == 2);
}

TEST_CASE("write then parse is a field-level round trip") {
  const auto scheme = LabelScheme::by_name("3way");
  std::vector<Sample> samples{mk("A", "q1", "some student words", 2),
                              mk("B", "q2", "other words entirely", 0)};
  TempFile f("roundtrip.tsv", "");
  write_samples(f.path, samples, scheme);
  auto back = parse_samples(f.path, scheme);
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].domain == samples[i].domain);
    CHECK(back[i].question_id == samples[i].question_id);
    CHECK(back[i].question == samples[i].question);
    CHECK(back[i].reference == samples[i].reference);
    CHECK(back[i].student == samples[i].student);
    CHECK(back[i].label == samples[i].label);
  }
}

TEST_CASE("split_per_question follows the ceiling rule") {
  std::vector<Sample> samples;
  for (int i = 0; i < 5; ++i) {
    samples.push_back(mk("A", "q1", "answer " + std::to_string(i)));
  }
  samples.push_back(mk("A", "q2", "lonely answer"));
  auto [train, test] = split_per_question(samples, 0.8, 1);

  std::map<std::string, int> train_counts, test_counts;
  for (const auto& s : train) ++train_counts[s.question_id];
  for (const auto& s : test) ++test_counts[s.question_id];
  CHECK(train_counts["q1"] == 4);
  CHECK(test_counts["q1"] == 1);
  CHECK(train_counts["q2"] == 1);  // single answer goes to train
  CHECK(test_counts["q2"] == 0);
}

TEST_CASE("split union equals input and sides are disjoint") {
  Rng rng(17);
  std::vector<Sample> samples;
  for (int q = 0; q < 12; ++q) {
    const int answers = 1 + static_cast<int>(rng.next_below(7));
    for (int a = 0; a < answers; ++a) {
      samples.push_back(mk("dom" + std::to_string(q % 3),
                           "q" + std::to_string(q),
                           "student answer " + std::to_string(q) + " " +
                               std::to_string(a)));
    }
  }
  auto [train, test] = split_per_question(samples, 0.8, 99);
  CHECK(train.size() + test.size() == samples.size());

  auto key = [](const Sample& s) { return s.question_id + "|" + s.student; };
  std::set<std::string> train_keys, test_keys, all_keys;
  for (const auto& s : train) train_keys.insert(key(s));
  for (const auto& s : test) test_keys.insert(key(s));
  for (const auto& s : samples) all_keys.insert(key(s));
  std::set<std::string> inter;
  std::set_intersection(train_keys.begin(), train_keys.end(),
                        test_keys.begin(), test_keys.end(),
                        std::inserter(inter, inter.begin()));
  CHECK(inter.empty());
  std::set<std::string> uni = train_keys;
  uni.insert(test_keys.begin(), test_keys.end());
  CHECK(uni == all_keys);

  // per-question proportions hold within one sample
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& s : train) ++counts[s.question_id].first;
  for (const auto& s : test) ++counts[s.question_id].second;
  for (const auto& [qid, c] : counts) {
    const int n = c.first + c.second;
    const int expect_train = static_cast<int>(std::ceil(0.8 * n));
    CHECK(c.first == expect_train);
  }
}

TEST_CASE("split is deterministic in the seed") {
  std::vector<Sample> samples;
  for (int i = 0; i < 10; ++i) {
    samples.push_back(mk("A", "q1", "answer " + std::to_string(i)));
  }
  auto [t1, e1] = split_per_question(samples, 0.7, 5);
  auto [t2, e2] = split_per_question(samples, 0.7, 5);
  auto [t3, e3] = split_per_question(samples, 0.7, 6);
  auto students = [](const std::vector<Sample>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) out.push_back(s.student);
    return out;
  };
  CHECK(students(t1) == students(t2));
  CHECK(students(e1) == students(e2));
  CHECK(students(e1) != students(e3));  // overwhelmingly likely
}

TEST_CASE("make_batches covers the corpus exactly once with the final short batch") {
  std::vector<Sample> corpus;
  for (int i = 0; i < 70; ++i) {
    corpus.push_back(mk("A", "q" + std::to_string(i % 7),
                        "student words " + std::to_string(i)));
  }
  Vocab vocab = build_vocab(corpus);
  auto batches = make_batches(corpus, 32, 50, vocab, 42, 0);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 32);
  CHECK(batches[1].size() == 32);
  CHECK(batches[2].size() == 6);

  // multiset equality over student texts via label-free key counting
  std::multiset<std::string> seen;
  for (const auto& b : batches) {
    CHECK(b.domain() == "A");
    for (std::size_t i = 0; i < b.size(); ++i) {
      std::string key;
      for (int id : b.stu_ids[i]) key += std::to_string(id) + ",";
      seen.insert(key);
    }
  }
  std::multiset<std::string> expect;
  for (const auto& s : corpus) {
    std::string key;
    for (int id : vocab.encode(s.student, 50)) key += std::to_string(id) + ",";
    expect.insert(key);
  }
  CHECK(seen == expect);

  // determinism in (seed, epoch); different epoch reshuffles
  auto again = make_batches(corpus, 32, 50, vocab, 42, 0);
  CHECK(again[0].stu_ids == batches[0].stu_ids);
  auto other = make_batches(corpus, 32, 50, vocab, 42, 1);
  CHECK(other[0].stu_ids != batches[0].stu_ids);
}

TEST_CASE("mixed-domain batch is rejected by domain()") {
  Batch b;
  b.domains = {"A", "B"};
  b.ref_ids = {{2}, {2}};
  b.stu_ids = {{2}, {2}};
  b.labels = {0, 0};
  CHECK_THROWS_AS(b.domain(), DataError);
}
