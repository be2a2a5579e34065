#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "herdsim/distribution.hpp"
#include "herdsim/influence.hpp"

namespace herdsim {

enum class ControlCondition {
  Original,
  CoT,
  Baseline,
  StrongFactors,
  WeakFactors,
  StrongPrompt,
  WeakPrompt,
};

std::string to_string(ControlCondition c);
ControlCondition control_condition_from_string(const std::string& s);

// Metadata identifying the experimental cell a trial belongs to.
struct TrialCondition {
  enum class Kind { Peer, Persona, Grid };

  Kind kind = Kind::Peer;
  std::optional<PeerCondition> peer;           // Kind::Peer
  Persona persona;                             // Kind::Persona (None otherwise)
  std::optional<PresentationFormat> format;    // Kind::Grid
  std::optional<PresentationOrder> order;      // Kind::Grid
  std::optional<int> n_agree;                  // Kind::Grid
  std::optional<int> n_disagree;               // Kind::Grid

  static TrialCondition peer_condition(PeerCondition c);
  static TrialCondition persona_condition(Persona p);
  static TrialCondition grid_cell(PresentationFormat f, PresentationOrder o,
                                  int agree, int disagree);

  /// Canonical grouping/sorting key, e.g. "peer:2nd" or
  /// "grid:ratio:agree_first:3a:1d".
  std::string key() const;
};

// One agent x question trial.
struct TrialRecord {
  std::string question_id;
  std::string benchmark;
  std::string model_id;
  TrialCondition condition;
  Response original;
  std::string peer_block;
  Response revised;
  int flip = 0;                     // 1 iff revised.choice != original.choice
  double self_confidence = 0.0;     // P(r_i | q)
  double perceived_confidence = 0.0;  // P(r_j | q) under the original distribution
};

// One question under the five-agent protocol.
struct GroupOutcome {
  std::string question_id;
  std::string benchmark;
  ControlCondition condition = ControlCondition::Baseline;
  std::vector<char> initial_answers;
  std::vector<char> final_answers;
  std::optional<int> flips;     // absent for Original/CoT (no revision round)
  double entropy = 0.0;         // over final answers, natural log
  int consensus = 0;
  std::optional<int> accuracy;  // factual benchmarks only
};

nlohmann::json to_json(const TrialRecord& r);
TrialRecord trial_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GroupOutcome& o);
GroupOutcome group_outcome_from_json(const nlohmann::json& j);

/// Sorts by (benchmark, question id, condition key) and writes one JSON
/// object per line.
void write_trial_records(std::ostream& out, std::vector<TrialRecord> records);
void write_group_outcomes(std::ostream& out, std::vector<GroupOutcome> outcomes);

struct RecordFile {
  std::vector<TrialRecord> trials;
  std::vector<GroupOutcome> outcomes;
  bool is_control() const { return !outcomes.empty(); }
};

/// Reads a records.jsonl stream; distinguishes trial and outcome records by
/// their fields. Throws ParseError with the line number on malformed lines.
RecordFile read_records(std::istream& in);
RecordFile load_records(const std::string& path);

}  // namespace herdsim
