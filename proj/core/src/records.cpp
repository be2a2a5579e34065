#include "herdsim/records.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "herdsim/error.hpp"

namespace herdsim {

using nlohmann::json;

std::string to_string(ControlCondition c) {
  switch (c) {
    case ControlCondition::Original: return "original";
    case ControlCondition::CoT: return "cot";
    case ControlCondition::Baseline: return "baseline";
    case ControlCondition::StrongFactors: return "strong_factors";
    case ControlCondition::WeakFactors: return "weak_factors";
    case ControlCondition::StrongPrompt: return "strong_prompt";
    case ControlCondition::WeakPrompt: return "weak_prompt";
  }
  throw ConfigError("unknown control condition");
}

ControlCondition control_condition_from_string(const std::string& s) {
  if (s == "original") return ControlCondition::Original;
  if (s == "cot") return ControlCondition::CoT;
  if (s == "baseline") return ControlCondition::Baseline;
  if (s == "strong_factors") return ControlCondition::StrongFactors;
  if (s == "weak_factors") return ControlCondition::WeakFactors;
  if (s == "strong_prompt") return ControlCondition::StrongPrompt;
  if (s == "weak_prompt") return ControlCondition::WeakPrompt;
  throw ConfigError("unknown control condition: " + s);
}

TrialCondition TrialCondition::peer_condition(PeerCondition c) {
  TrialCondition t;
  t.kind = Kind::Peer;
  t.peer = c;
  return t;
}

TrialCondition TrialCondition::persona_condition(Persona p) {
  TrialCondition t;
  t.kind = Kind::Persona;
  t.persona = std::move(p);
  return t;
}

TrialCondition TrialCondition::grid_cell(PresentationFormat f, PresentationOrder o,
                                         int agree, int disagree) {
  TrialCondition t;
  t.kind = Kind::Grid;
  t.format = f;
  t.order = o;
  t.n_agree = agree;
  t.n_disagree = disagree;
  return t;
}

std::string TrialCondition::key() const {
  switch (kind) {
    case Kind::Peer:
      return "peer:" + to_string(*peer);
    case Kind::Persona:
      return "persona:" + to_string(persona.tier);
    case Kind::Grid:
      return "grid:" + to_string(*format) + ":" + to_string(*order) + ":" +
             std::to_string(*n_agree) + "a:" + std::to_string(*n_disagree) + "d";
  }
  throw ConfigError("unknown trial condition kind");
}

namespace {

json response_to_json(const Response& r) {
  json probs = json::object();
  for (const auto& [label, p] : r.distribution.probs)
    probs[std::string(1, label)] = p;
  return json{{"choice", std::string(1, r.choice)},
              {"confidence", r.confidence},
              {"distribution", std::move(probs)}};
}

Response response_from_json(const json& j) {
  Response r;
  r.choice = j.at("choice").get<std::string>().at(0);
  r.confidence = j.at("confidence").get<double>();
  for (const auto& [key, value] : j.at("distribution").items())
    r.distribution.probs[key.at(0)] = value.get<double>();
  return r;
}

json condition_to_json(const TrialCondition& c) {
  json j;
  switch (c.kind) {
    case TrialCondition::Kind::Peer:
      j["kind"] = "peer";
      j["peer"] = to_string(*c.peer);
      break;
    case TrialCondition::Kind::Persona:
      j["kind"] = "persona";
      j["persona"] = to_string(c.persona.tier);
      if (!c.persona.domain.empty()) j["domain"] = c.persona.domain;
      break;
    case TrialCondition::Kind::Grid:
      j["kind"] = "grid";
      j["format"] = to_string(*c.format);
      j["order"] = to_string(*c.order);
      j["n_agree"] = *c.n_agree;
      j["n_disagree"] = *c.n_disagree;
      break;
  }
  return j;
}

TrialCondition condition_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "peer")
    return TrialCondition::peer_condition(
        peer_condition_from_string(j.at("peer").get<std::string>()));
  if (kind == "persona") {
    Persona p;
    p.tier = persona_tier_from_string(j.at("persona").get<std::string>());
    if (j.contains("domain")) p.domain = j.at("domain").get<std::string>();
    return TrialCondition::persona_condition(std::move(p));
  }
  if (kind == "grid")
    return TrialCondition::grid_cell(
        presentation_format_from_string(j.at("format").get<std::string>()),
        presentation_order_from_string(j.at("order").get<std::string>()),
        j.at("n_agree").get<int>(), j.at("n_disagree").get<int>());
  throw ConfigError("unknown trial condition kind: " + kind);
}

std::string labels_to_string(const std::vector<char>& labels) {
  return std::string(labels.begin(), labels.end());
}

std::vector<char> labels_from_string(const std::string& s) {
  return std::vector<char>(s.begin(), s.end());
}

}  // namespace

json to_json(const TrialRecord& r) {
  json j;
  j["question_id"] = r.question_id;
  j["benchmark"] = r.benchmark;
  j["model_id"] = r.model_id;
  j["condition"] = condition_to_json(r.condition);
  j["original"] = response_to_json(r.original);
  j["peer_block"] = r.peer_block;
  j["revised"] = response_to_json(r.revised);
  j["flip"] = r.flip;
  j["self_confidence"] = r.self_confidence;
  j["perceived_confidence"] = r.perceived_confidence;
  return j;
}

TrialRecord trial_record_from_json(const json& j) {
  TrialRecord r;
  r.question_id = j.at("question_id").get<std::string>();
  r.benchmark = j.at("benchmark").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.condition = condition_from_json(j.at("condition"));
  r.original = response_from_json(j.at("original"));
  r.peer_block = j.at("peer_block").get<std::string>();
  r.revised = response_from_json(j.at("revised"));
  r.flip = j.at("flip").get<int>();
  r.self_confidence = j.at("self_confidence").get<double>();
  r.perceived_confidence = j.at("perceived_confidence").get<double>();
  return r;
}

json to_json(const GroupOutcome& o) {
  json j;
  j["question_id"] = o.question_id;
  j["benchmark"] = o.benchmark;
  j["condition"] = to_string(o.condition);
  j["initial_answers"] = labels_to_string(o.initial_answers);
  j["final_answers"] = labels_to_string(o.final_answers);
  if (o.flips) j["flips"] = *o.flips;
  j["entropy"] = o.entropy;
  j["consensus"] = o.consensus;
  if (o.accuracy) j["accuracy"] = *o.accuracy;
  return j;
}

GroupOutcome group_outcome_from_json(const json& j) {
  GroupOutcome o;
  o.question_id = j.at("question_id").get<std::string>();
  o.benchmark = j.at("benchmark").get<std::string>();
  o.condition = control_condition_from_string(j.at("condition").get<std::string>());
  o.initial_answers = labels_from_string(j.at("initial_answers").get<std::string>());
  o.final_answers = labels_from_string(j.at("final_answers").get<std::string>());
  if (j.contains("flips")) o.flips = j.at("flips").get<int>();
  o.entropy = j.at("entropy").get<double>();
  o.consensus = j.at("consensus").get<int>();
  if (j.contains("accuracy")) o.accuracy = j.at("accuracy").get<int>();
  return o;
}

void write_trial_records(std::ostream& out, std::vector<TrialRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const TrialRecord& a, const TrialRecord& b) {
              if (a.benchmark != b.benchmark) return a.benchmark < b.benchmark;
              if (a.question_id != b.question_id) return a.question_id < b.question_id;
              return a.condition.key() < b.condition.key();
            });
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_group_outcomes(std::ostream& out, std::vector<GroupOutcome> outcomes) {
  std::sort(outcomes.begin(), outcomes.end(),
            [](const GroupOutcome& a, const GroupOutcome& b) {
              if (a.benchmark != b.benchmark) return a.benchmark < b.benchmark;
              if (a.question_id != b.question_id) return a.question_id < b.question_id;
              return to_string(a.condition) < to_string(b.condition);
            });
  for (const auto& o : outcomes) out << to_json(o).dump() << '\n';
}

RecordFile read_records(std::istream& in) {
  RecordFile file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
    try {
      if (j.contains("final_answers")) {
        file.outcomes.push_back(group_outcome_from_json(j));
      } else {
        file.trials.push_back(trial_record_from_json(j));
      }
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return file;
}

RecordFile load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open records file: " + path);
  return read_records(in);
}

}  // namespace herdsim
