#include "herdsim/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "herdsim/agents.hpp"
#include "herdsim/error.hpp"
#include "herdsim/rng.hpp"

namespace herdsim {

using nlohmann::json;

std::string to_string(QuestionKind kind) {
  return kind == QuestionKind::Factual ? "factual" : "opinionated";
}

QuestionKind question_kind_from_string(const std::string& s) {
  if (s == "factual") return QuestionKind::Factual;
  if (s == "opinionated") return QuestionKind::Opinionated;
  throw ValidationError(s, "unknown question kind");
}

std::vector<char> Question::labels() const {
  std::vector<char> out;
  out.reserve(choices.size());
  for (const auto& c : choices) out.push_back(c.label);
  return out;
}

bool Question::has_label(char label) const {
  return std::any_of(choices.begin(), choices.end(),
                     [&](const Choice& c) { return c.label == label; });
}

void validate_question(const Question& q) {
  if (q.id.empty()) throw ValidationError(q.id, "empty question id");
  if (q.choices.size() < 2 || q.choices.size() > 26)
    throw ValidationError(q.id, "choice count outside [2,26]");
  for (std::size_t i = 0; i < q.choices.size(); ++i) {
    if (q.choices[i].label != static_cast<char>('A' + i))
      throw ValidationError(q.id, "non-consecutive labels");
  }
  if (q.kind == QuestionKind::Factual) {
    if (!q.gold) throw ValidationError(q.id, "factual question lacks gold label");
    if (!q.has_label(*q.gold))
      throw ValidationError(q.id, "gold label not among choices");
  } else if (q.gold) {
    throw ValidationError(q.id, "opinionated question carries gold label");
  }
  if (q.domain) {
    if (q.domain->empty()) throw ValidationError(q.id, "empty domain tag");
    for (unsigned char c : *q.domain) {
      if (std::isupper(c) || std::isspace(c))
        throw ValidationError(q.id, "domain must be a lowercase token");
    }
  }
}

void validate_benchmark(const Benchmark& b) {
  std::set<std::string> ids;
  for (const auto& q : b.questions) {
    validate_question(q);
    if (q.kind != b.kind)
      throw ValidationError(q.id, "question kind differs from benchmark kind");
    if (!ids.insert(q.id).second)
      throw ValidationError(q.id, "duplicate question id");
  }
}

namespace {

Question question_from_json(const json& rec) {
  Question q;
  q.id = rec.at("id").get<std::string>();
  q.text = rec.at("question").get<std::string>();
  const auto& choices = rec.at("choices");
  if (!choices.is_array()) throw ValidationError(q.id, "choices must be an array");
  char label = 'A';
  for (const auto& c : choices) {
    q.choices.push_back(Choice{label++, c.get<std::string>()});
  }
  if (rec.contains("gold") && !rec.at("gold").is_null()) {
    const auto g = rec.at("gold").get<std::string>();
    if (g.size() != 1) throw ValidationError(q.id, "gold label must be a single letter");
    q.gold = g[0];
  }
  if (rec.contains("domain") && !rec.at("domain").is_null())
    q.domain = rec.at("domain").get<std::string>();
  q.kind = question_kind_from_string(rec.at("kind").get<std::string>());
  return q;
}

json question_to_json(const Question& q) {
  json rec;
  rec["id"] = q.id;
  rec["question"] = q.text;
  json choices = json::array();
  for (const auto& c : q.choices) choices.push_back(c.text);
  rec["choices"] = std::move(choices);
  if (q.gold) rec["gold"] = std::string(1, *q.gold);
  if (q.domain) rec["domain"] = *q.domain;
  rec["kind"] = to_string(q.kind);
  return rec;
}

}  // namespace

Benchmark parse_benchmark(std::istream& in, std::string name) {
  Benchmark b;
  b.name = std::move(name);
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> domains;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
    Question q;
    try {
      q = question_from_json(rec);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
    validate_question(q);
    if (first) {
      b.kind = q.kind;
      first = false;
    }
    if (q.domain) domains.insert(*q.domain);
    b.questions.push_back(std::move(q));
  }
  b.domains.assign(domains.begin(), domains.end());
  validate_benchmark(b);
  return b;
}

Benchmark load_benchmark(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open benchmark file: " + path);
  return parse_benchmark(in, std::filesystem::path(path).stem().string());
}

void serialize_benchmark(const Benchmark& b, std::ostream& out) {
  for (const auto& q : b.questions) out << question_to_json(q).dump() << '\n';
}

void save_benchmark(const Benchmark& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write benchmark file: " + path);
  serialize_benchmark(b, out);
}

std::vector<Question> sample_questions(const Benchmark& b, std::size_t n,
                                       std::uint64_t seed) {
  if (n < 1) throw ValidationError(b.name, "sample size must be >= 1");
  Rng rng(seed, {"dataset.sample", b.name});
  const std::size_t total = b.questions.size();
  const std::size_t take = std::min(n, total);

  // Partial Fisher-Yates over an index vector; the prefix is the sample in
  // sampled order.
  std::vector<std::size_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = i;
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.next_below(total - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<Question> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(b.questions[idx[i]]);
  return out;
}

std::vector<Question> filter_contentious(const Benchmark& b,
                                         const AgentModel& agent,
                                         double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ValidationError(b.name, "contentiousness threshold must be in (0,1]");
  std::vector<Question> out;
  for (const auto& q : b.questions) {
    Response original;
    try {
      original = original_response(agent, q);
    } catch (const Error& e) {
      throw GatewayError(e.what(), q.id);
    }
    if (original.distribution.max_prob() < threshold) out.push_back(q);
  }
  return out;
}

}  // namespace herdsim
