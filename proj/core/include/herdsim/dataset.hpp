#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace herdsim {

class AgentModel;

enum class QuestionKind { Factual, Opinionated };

std::string to_string(QuestionKind kind);
QuestionKind question_kind_from_string(const std::string& s);

struct Choice {
  char label = 'A';
  std::string text;
};

// One multiple-choice item. Labels are always regenerated as consecutive
// uppercase letters A, B, C, ... in file order; upstream numbering is
// discarded so every label is a single token.
struct Question {
  std::string id;
  std::string text;
  std::vector<Choice> choices;
  std::optional<char> gold;
  std::optional<std::string> domain;
  QuestionKind kind = QuestionKind::Factual;

  std::vector<char> labels() const;
  bool has_label(char label) const;
};

struct Benchmark {
  std::string name;
  QuestionKind kind = QuestionKind::Factual;
  std::vector<Question> questions;
  std::vector<std::string> domains;  // sorted, unique
};

/// Throws ValidationError naming the question id and the failed rule.
void validate_question(const Question& q);
void validate_benchmark(const Benchmark& b);

/// Parses line-delimited JSON records (see README for the schema).
/// Throws ParseError with the offending line number, or ValidationError.
Benchmark parse_benchmark(std::istream& in, std::string name);
Benchmark load_benchmark(const std::string& path);

/// Inverse of load_benchmark; load(serialize(b)) == b for valid benchmarks.
void serialize_benchmark(const Benchmark& b, std::ostream& out);
void save_benchmark(const Benchmark& b, const std::string& path);

/// min(n, |questions|) questions drawn uniformly without replacement from the
/// stream (seed, "dataset.sample", benchmark name). Deterministic per seed;
/// the returned order is the sampled order.
std::vector<Question> sample_questions(const Benchmark& b, std::size_t n,
                                       std::uint64_t seed);

/// Keeps exactly the questions whose original-distribution maximum
/// probability under `agent` is < threshold, in benchmark order.
std::vector<Question> filter_contentious(const Benchmark& b,
                                         const AgentModel& agent,
                                         double threshold);

}  // namespace herdsim
