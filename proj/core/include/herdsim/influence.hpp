#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "herdsim/distribution.hpp"

namespace herdsim {

// Which answer from the target's own original distribution the peer voices.
enum class PeerCondition { First, Second, Random, Last };

enum class PresentationFormat { Count, Ratio, List, Disc, Reason };
enum class PresentationOrder { AgreeFirst, DisagreeFirst };

std::string to_string(PeerCondition c);
std::string to_string(PresentationFormat f);
std::string to_string(PresentationOrder o);
PeerCondition peer_condition_from_string(const std::string& s);
PresentationFormat presentation_format_from_string(const std::string& s);
PresentationOrder presentation_order_from_string(const std::string& s);

struct Persona {
  enum class Tier {
    None,
    Graduate,
    College,
    HighSchool,
    Employer,
    Employee,
    InDomain,
    OutOfDomain,
  };

  Tier tier = Tier::None;
  std::string domain;  // InDomain/OutOfDomain only

  static Persona none() { return {}; }
  static Persona education(Tier t) { return {t, {}}; }
  static Persona in_domain(std::string d) { return {Tier::InDomain, std::move(d)}; }
  static Persona out_of_domain(std::string d) { return {Tier::OutOfDomain, std::move(d)}; }

  bool operator==(const Persona&) const = default;
};

std::string to_string(Persona::Tier t);
Persona::Tier persona_tier_from_string(const std::string& s);

struct PeerOpinion {
  std::string agent_name;  // "Agent A", ... assigned in presentation order
  char choice = 'A';
  Persona persona;
  std::optional<std::string> reason;
};

// Peer opinions partitioned relative to the target agent's answer. The
// dyadic/grid constructions (build_panel) keep a single disagreeing label;
// the five-agent protocol may put several distinct labels in `disagreeing`,
// which render_panel renders as one block per label.
struct PeerPanel {
  std::vector<PeerOpinion> agreeing;
  std::vector<PeerOpinion> disagreeing;
  PresentationOrder order = PresentationOrder::AgreeFirst;

  std::size_t size() const { return agreeing.size() + disagreeing.size(); }
};

/// Labels sorted by descending probability; ties break to the lower label.
std::vector<char> ranked_labels(const ChoiceDistribution& dist);

/// First -> argmax, Second -> 2nd-ranked, Last -> lowest-ranked,
/// Random -> one draw from dist seeded by `seed`.
char select_peer_opinion(const ChoiceDistribution& dist, PeerCondition condition,
                         std::uint64_t seed);

/// Byte-exact persona statement for a single peer named "Agent A".
std::string render_persona(const Persona& p, char peer_choice);

/// Renders the agreeing and disagreeing blocks in panel order, joined by
/// single newlines. Empty sides are omitted. Throws on Reason panels with
/// missing reasons.
std::string render_panel(const PeerPanel& panel, PresentationFormat format);

/// n_agree opinions on `original` plus n_disagree on `alternative`
/// (alternative != original, n_agree + n_disagree >= 1), named "Agent A",
/// "Agent B", ... in final presentation order.
PeerPanel build_panel(char original, char alternative, int n_agree,
                      int n_disagree, PresentationOrder order,
                      const Persona& persona);

// Percent rounding used by the Ratio format: half-up to integer.
int percent_half_up(int part, int total);

}  // namespace herdsim
