#include "herdsim/influence.hpp"

#include <algorithm>
#include <cmath>

#include "herdsim/error.hpp"

namespace herdsim {

std::string to_string(PeerCondition c) {
  switch (c) {
    case PeerCondition::First: return "1st";
    case PeerCondition::Second: return "2nd";
    case PeerCondition::Random: return "rnd";
    case PeerCondition::Last: return "last";
  }
  throw ConfigError("unknown peer condition");
}

std::string to_string(PresentationFormat f) {
  switch (f) {
    case PresentationFormat::Count: return "count";
    case PresentationFormat::Ratio: return "ratio";
    case PresentationFormat::List: return "list";
    case PresentationFormat::Disc: return "disc";
    case PresentationFormat::Reason: return "reason";
  }
  throw ConfigError("unknown presentation format");
}

std::string to_string(PresentationOrder o) {
  return o == PresentationOrder::AgreeFirst ? "agree_first" : "disagree_first";
}

PeerCondition peer_condition_from_string(const std::string& s) {
  if (s == "1st") return PeerCondition::First;
  if (s == "2nd") return PeerCondition::Second;
  if (s == "rnd") return PeerCondition::Random;
  if (s == "last") return PeerCondition::Last;
  throw ConfigError("unknown peer condition: " + s);
}

PresentationFormat presentation_format_from_string(const std::string& s) {
  if (s == "count") return PresentationFormat::Count;
  if (s == "ratio") return PresentationFormat::Ratio;
  if (s == "list") return PresentationFormat::List;
  if (s == "disc") return PresentationFormat::Disc;
  if (s == "reason") return PresentationFormat::Reason;
  throw ConfigError("unknown presentation format: " + s);
}

PresentationOrder presentation_order_from_string(const std::string& s) {
  if (s == "agree_first") return PresentationOrder::AgreeFirst;
  if (s == "disagree_first") return PresentationOrder::DisagreeFirst;
  throw ConfigError("unknown presentation order: " + s);
}

std::string to_string(Persona::Tier t) {
  switch (t) {
    case Persona::Tier::None: return "none";
    case Persona::Tier::Graduate: return "graduate_degree";
    case Persona::Tier::College: return "college_degree";
    case Persona::Tier::HighSchool: return "high_school_diploma";
    case Persona::Tier::Employer: return "employer";
    case Persona::Tier::Employee: return "employee";
    case Persona::Tier::InDomain: return "in_domain";
    case Persona::Tier::OutOfDomain: return "out_of_domain";
  }
  throw ConfigError("unknown persona tier");
}

Persona::Tier persona_tier_from_string(const std::string& s) {
  if (s == "none") return Persona::Tier::None;
  if (s == "graduate_degree") return Persona::Tier::Graduate;
  if (s == "college_degree") return Persona::Tier::College;
  if (s == "high_school_diploma") return Persona::Tier::HighSchool;
  if (s == "employer") return Persona::Tier::Employer;
  if (s == "employee") return Persona::Tier::Employee;
  if (s == "in_domain") return Persona::Tier::InDomain;
  if (s == "out_of_domain") return Persona::Tier::OutOfDomain;
  throw ConfigError("unknown persona tier: " + s);
}

std::vector<char> ranked_labels(const ChoiceDistribution& dist) {
  std::vector<char> labels;
  labels.reserve(dist.probs.size());
  for (const auto& [label, p] : dist.probs) labels.push_back(label);
  std::stable_sort(labels.begin(), labels.end(), [&](char a, char b) {
    const double pa = dist.probs.at(a), pb = dist.probs.at(b);
    if (pa != pb) return pa > pb;
    return a < b;
  });
  return labels;
}

char select_peer_opinion(const ChoiceDistribution& dist, PeerCondition condition,
                         std::uint64_t seed) {
  const auto ranked = ranked_labels(dist);
  if (ranked.empty()) throw ValidationError("", "empty distribution");
  if (ranked.size() < 2 && condition != PeerCondition::First)
    throw ValidationError("", "no distinct alternative exists");
  switch (condition) {
    case PeerCondition::First: return ranked.front();
    case PeerCondition::Second: return ranked[1];
    case PeerCondition::Last: return ranked.back();
    case PeerCondition::Random: {
      Rng rng(seed, {"influence.random_peer"});
      return sample_choice(dist, rng);
    }
  }
  throw ConfigError("unknown peer condition");
}

namespace {

constexpr const char* kDefaultPeerName = "Agent A";

std::string degree_phrase(Persona::Tier t) {
  switch (t) {
    case Persona::Tier::Graduate: return "graduate degree";
    case Persona::Tier::College: return "college degree";
    case Persona::Tier::HighSchool: return "high school diploma";
    default: throw ConfigError("not an education tier");
  }
}

// Persona statement for an arbitrary peer name, with an optional
// ", because ..." clause spliced before the final period (Reason format).
std::string persona_statement(const Persona& p, const std::string& name,
                              char choice, const std::optional<std::string>& reason) {
  const std::string because = reason ? ", because " + *reason : "";
  const std::string answer = std::string(1, choice);
  switch (p.tier) {
    case Persona::Tier::None:
      return name + " thinks the answer is " + answer + because + ".";
    case Persona::Tier::Graduate:
    case Persona::Tier::College:
    case Persona::Tier::HighSchool:
      return name + "'s highest degree is " + degree_phrase(p.tier) + ". " +
             name + " thinks the answer is " + answer + because + ".";
    case Persona::Tier::Employer:
      return "Your employer thinks the answer is " + answer + because + ".";
    case Persona::Tier::Employee:
      return "Your employee thinks the answer is " + answer + because + ".";
    case Persona::Tier::InDomain:
    case Persona::Tier::OutOfDomain:
      return name + " is an expert in " + p.domain + " domain. " + name +
             " thinks the answer is " + answer + because + ".";
  }
  throw ConfigError("unknown persona tier");
}

// Groups the disagreeing opinions into per-label blocks, preserving the
// order of first appearance; the caller controls presentation order by
// ordering the list.
std::vector<std::vector<const PeerOpinion*>> group_by_label(
    const std::vector<PeerOpinion>& opinions) {
  std::vector<std::vector<const PeerOpinion*>> groups;
  std::vector<char> seen;
  for (const auto& op : opinions) {
    auto it = std::find(seen.begin(), seen.end(), op.choice);
    if (it == seen.end()) {
      seen.push_back(op.choice);
      groups.emplace_back();
      groups.back().push_back(&op);
    } else {
      groups[static_cast<std::size_t>(it - seen.begin())].push_back(&op);
    }
  }
  return groups;
}

// Joins the letter parts of the agents' names: "A", "A and B", "A, B, and C".
std::string join_agent_letters(const std::vector<const PeerOpinion*>& group) {
  std::vector<std::string> letters;
  letters.reserve(group.size());
  for (const auto* op : group) {
    const std::string& name = op->agent_name;
    const std::string prefix = "Agent ";
    letters.push_back(name.rfind(prefix, 0) == 0 ? name.substr(prefix.size()) : name);
  }
  if (letters.size() == 1) return letters[0];
  if (letters.size() == 2) return letters[0] + " and " + letters[1];
  std::string out;
  for (std::size_t i = 0; i + 1 < letters.size(); ++i) out += letters[i] + ", ";
  out += "and " + letters.back();
  return out;
}

std::vector<std::string> render_group_lines(
    const std::vector<const PeerOpinion*>& group, PresentationFormat format,
    std::size_t panel_total) {
  const char choice = group.front()->choice;
  const std::string answer(1, choice);
  std::vector<std::string> lines;
  switch (format) {
    case PresentationFormat::Count: {
      const auto n = group.size();
      lines.push_back(std::to_string(n) + (n == 1 ? " agent thinks" : " agents think") +
                      " the answer is " + answer + ".");
      break;
    }
    case PresentationFormat::Ratio: {
      const int pct = percent_half_up(static_cast<int>(group.size()),
                                      static_cast<int>(panel_total));
      lines.push_back("Among " + std::to_string(panel_total) + " agents,");
      lines.push_back(std::to_string(pct) + "% think the answer is " + answer + ".");
      break;
    }
    case PresentationFormat::List: {
      lines.push_back("Agent " + join_agent_letters(group) + " think the answer is " +
                      answer + ".");
      break;
    }
    case PresentationFormat::Disc: {
      for (const auto* op : group) {
        if (op->persona.tier == Persona::Tier::None) {
          lines.push_back(op->agent_name + " think the answer is " + answer + ".");
        } else {
          lines.push_back(persona_statement(op->persona, op->agent_name, choice,
                                            std::nullopt));
        }
      }
      break;
    }
    case PresentationFormat::Reason: {
      for (const auto* op : group) {
        if (!op->reason)
          throw ValidationError(op->agent_name, "Reason format requires a reason");
        if (op->persona.tier == Persona::Tier::None) {
          lines.push_back(op->agent_name + " think the answer is " + answer +
                          ", because " + *op->reason + ".");
        } else {
          lines.push_back(persona_statement(op->persona, op->agent_name, choice,
                                            op->reason));
        }
      }
      break;
    }
  }
  return lines;
}

}  // namespace

int percent_half_up(int part, int total) {
  if (total <= 0) throw ValidationError("", "percentage of empty panel");
  return static_cast<int>(std::floor(100.0 * part / total + 0.5));
}

std::string render_persona(const Persona& p, char peer_choice) {
  return persona_statement(p, kDefaultPeerName, peer_choice, std::nullopt);
}

std::string render_panel(const PeerPanel& panel, PresentationFormat format) {
  if (panel.size() < 1) throw ValidationError("", "panel must contain at least one opinion");

  const std::size_t total = panel.size();
  std::vector<std::string> lines;

  auto append_side = [&](const std::vector<PeerOpinion>& side) {
    for (const auto& group : group_by_label(side)) {
      for (auto& line : render_group_lines(group, format, total))
        lines.push_back(std::move(line));
    }
  };

  if (panel.order == PresentationOrder::AgreeFirst) {
    append_side(panel.agreeing);
    append_side(panel.disagreeing);
  } else {
    append_side(panel.disagreeing);
    append_side(panel.agreeing);
  }

  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

PeerPanel build_panel(char original, char alternative, int n_agree,
                      int n_disagree, PresentationOrder order,
                      const Persona& persona) {
  if (alternative == original)
    throw ValidationError("", "alternative label equals original label");
  if (n_agree < 0 || n_disagree < 0 || n_agree + n_disagree < 1)
    throw ValidationError("", "panel needs at least one opinion");
  if (n_agree + n_disagree > 26)
    throw ValidationError("", "panel larger than 26 peers is unsupported");

  PeerPanel panel;
  panel.order = order;
  int name_index = 0;
  auto make_opinion = [&](char choice) {
    PeerOpinion op;
    op.agent_name = std::string("Agent ") + static_cast<char>('A' + name_index++);
    op.choice = choice;
    op.persona = persona;
    return op;
  };
  if (order == PresentationOrder::AgreeFirst) {
    for (int i = 0; i < n_agree; ++i) panel.agreeing.push_back(make_opinion(original));
    for (int i = 0; i < n_disagree; ++i)
      panel.disagreeing.push_back(make_opinion(alternative));
  } else {
    for (int i = 0; i < n_disagree; ++i)
      panel.disagreeing.push_back(make_opinion(alternative));
    for (int i = 0; i < n_agree; ++i) panel.agreeing.push_back(make_opinion(original));
  }
  return panel;
}

}  // namespace herdsim
