#include <doctest.h>

#include <set>
#include <cmath>
#include <sstream>

#include "herdsim/dataset.hpp"
#include "herdsim/error.hpp"
#include "herdsim/rng.hpp"
#include "test_util.hpp"

using namespace herdsim;
using namespace herdsim::test;

namespace {

Benchmark parse_lines(const std::string& lines, const std::string& name = "bench") {
  std::istringstream in(lines);
  return parse_benchmark(in, name);
}

}  // namespace

TEST_CASE("minimal valid benchmark loads") {
  const auto b = parse_lines(
      R"({"id":"q1","question":"pick one","choices":["w","x","y","z"],"gold":"B","kind":"factual"})"
      "\n");
  REQUIRE(b.questions.size() == 1);
  CHECK(b.kind == QuestionKind::Factual);
  const auto& q = b.questions[0];
  CHECK(q.id == "q1");
  CHECK(q.choices.size() == 4);
  CHECK(q.labels() == std::vector<char>{'A', 'B', 'C', 'D'});
  CHECK(q.gold == 'B');
}

TEST_CASE("parse errors carry the line number") {
  try {
    parse_lines(
        R"({"id":"q1","question":"ok","choices":["a","b"],"gold":"A","kind":"factual"})"
        "\nnot json\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("validation failures name the id and rule") {
  // Labels are regenerated A,B,..., so a label gap cannot come from the
  // file; check the invariant directly.
  Question q = make_question("gap", 3, 'A');
  q.choices[1].label = 'C';
  try {
    validate_question(q);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.id() == "gap");
    CHECK(e.rule() == "non-consecutive labels");
  }

  // gold outside the label set
  CHECK_THROWS_AS(
      parse_lines(
          R"({"id":"q1","question":"ok","choices":["a","b","c","d"],"gold":"E","kind":"factual"})"
          "\n"),
      ValidationError);
  // opinionated question with a gold label
  CHECK_THROWS_AS(
      parse_lines(
          R"({"id":"q1","question":"ok","choices":["a","b"],"gold":"A","kind":"opinionated"})"
          "\n"),
      ValidationError);
  // factual question without gold
  CHECK_THROWS_AS(
      parse_lines(R"({"id":"q1","question":"ok","choices":["a","b"],"kind":"factual"})"
                  "\n"),
      ValidationError);
  // duplicate ids
  CHECK_THROWS_AS(
      parse_lines(
          R"({"id":"q1","question":"ok","choices":["a","b"],"gold":"A","kind":"factual"})"
          "\n"
          R"({"id":"q1","question":"ok","choices":["a","b"],"gold":"B","kind":"factual"})"
          "\n"),
      ValidationError);
  // mixed kinds
  CHECK_THROWS_AS(
      parse_lines(
          R"({"id":"q1","question":"ok","choices":["a","b"],"gold":"A","kind":"factual"})"
          "\n"
          R"({"id":"q2","question":"ok","choices":["a","b"],"kind":"opinionated"})"
          "\n"),
      ValidationError);
  // single choice
  CHECK_THROWS_AS(
      parse_lines(R"({"id":"q1","question":"ok","choices":["a"],"gold":"A","kind":"factual"})"
                  "\n"),
      ValidationError);
  // uppercase domain token
  CHECK_THROWS_AS(
      parse_lines(
          R"({"id":"q1","question":"ok","choices":["a","b"],"gold":"A","domain":"Physics","kind":"factual"})"
          "\n"),
      ValidationError);
}

TEST_CASE("serialize then load is the identity") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    Benchmark b = make_benchmark("round", 1 + static_cast<int>(rng.next_below(30)),
                                 2 + static_cast<int>(rng.next_below(6)));
    // Vary domains and gold labels.
    for (auto& q : b.questions) {
      if (rng.next_below(2)) q.domain = "physics";
      q.gold = static_cast<char>('A' + rng.next_below(q.choices.size()));
    }
    std::ostringstream out;
    serialize_benchmark(b, out);
    std::istringstream in(out.str());
    const Benchmark loaded = parse_benchmark(in, "round");
    REQUIRE(loaded.questions.size() == b.questions.size());
    for (std::size_t i = 0; i < b.questions.size(); ++i) {
      CHECK(loaded.questions[i].id == b.questions[i].id);
      CHECK(loaded.questions[i].text == b.questions[i].text);
      CHECK(loaded.questions[i].gold == b.questions[i].gold);
      CHECK(loaded.questions[i].domain == b.questions[i].domain);
      CHECK(loaded.questions[i].kind == b.questions[i].kind);
      REQUIRE(loaded.questions[i].choices.size() == b.questions[i].choices.size());
      for (std::size_t c = 0; c < b.questions[i].choices.size(); ++c) {
        CHECK(loaded.questions[i].choices[c].label == b.questions[i].choices[c].label);
        CHECK(loaded.questions[i].choices[c].text == b.questions[i].choices[c].text);
      }
    }
  }
}

TEST_CASE("sampling all questions yields a permutation") {
  const Benchmark b = make_benchmark("perm", 50, 4);
  const auto sample = sample_questions(b, 50, 9);
  REQUIRE(sample.size() == 50);
  std::set<std::string> ids;
  for (const auto& q : sample) ids.insert(q.id);
  CHECK(ids.size() == 50);
}

TEST_CASE("sampling caps at n distinct questions") {
  const Benchmark b = make_benchmark("arc", 1172, 4);
  const auto sample = sample_questions(b, 200, 7);
  REQUIRE(sample.size() == 200);
  std::set<std::string> ids;
  for (const auto& q : sample) ids.insert(q.id);
  CHECK(ids.size() == 200);
}

TEST_CASE("sampling is deterministic per seed") {
  const Benchmark b = make_benchmark("det", 100, 4);
  const auto s1 = sample_questions(b, 30, 1234);
  const auto s2 = sample_questions(b, 30, 1234);
  REQUIRE(s1.size() == s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i].id == s2[i].id);

  const auto s3 = sample_questions(b, 30, 1235);
  bool any_diff = false;
  for (std::size_t i = 0; i < s1.size(); ++i) any_diff |= s1[i].id != s3[i].id;
  CHECK(any_diff);
}

TEST_CASE("sampling never duplicates ids") {
  Rng rng(77);
  const Benchmark b = make_benchmark("dup", 37, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = 1 + rng.next_below(60);
    const auto sample = sample_questions(b, n, rng.next_u64());
    std::set<std::string> ids;
    for (const auto& q : sample) ids.insert(q.id);
    CHECK(ids.size() == sample.size());
    CHECK(sample.size() == std::min<std::size_t>(n, 37));
  }
}

TEST_CASE("contentiousness filter keeps questions below the threshold") {
  Benchmark b;
  b.name = "filter";
  b.kind = QuestionKind::Factual;
  b.questions = {make_question("sure", 2, 'A'), make_question("split3", 3, 'A'),
                 make_question("uniform4", 4, 'A')};

  SyntheticAgent agent(SyntheticParams::defaults(), 5);
  // P(A) = 0.9 for "sure": logit gap ln(9).
  agent.set_base_logits("sure", LogitVector{{{'A', std::log(9.0)}, {'B', 0.0}}});
  // {0.5, 0.3, 0.2}
  agent.set_base_logits("split3", LogitVector{{{'A', std::log(0.5)},
                                               {'B', std::log(0.3)},
                                               {'C', std::log(0.2)}}});
  agent.set_base_logits("uniform4",
                        LogitVector{{{'A', 0.0}, {'B', 0.0}, {'C', 0.0}, {'D', 0.0}}});

  const auto kept = filter_contentious(b, agent, 0.8);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].id == "split3");
  CHECK(kept[1].id == "uniform4");

  // Monotone in the threshold: a larger threshold keeps a superset.
  const auto kept_low = filter_contentious(b, agent, 0.45);
  const auto kept_high = filter_contentious(b, agent, 1.0);
  CHECK(kept_low.size() <= kept.size());
  CHECK(kept.size() <= kept_high.size());
  CHECK(kept_high.size() == 3);
  // Just above uniform probability only near-uniform questions survive.
  const auto kept_tight = filter_contentious(b, agent, 0.26);
  REQUIRE(kept_tight.size() == 1);
  CHECK(kept_tight[0].id == "uniform4");
}

TEST_CASE("filter rejects a bad threshold") {
  const Benchmark b = make_benchmark("t", 1, 2);
  SyntheticAgent agent(SyntheticParams::defaults(), 5);
  CHECK_THROWS_AS(filter_contentious(b, agent, 0.0), ValidationError);
  CHECK_THROWS_AS(filter_contentious(b, agent, 1.5), ValidationError);
}
