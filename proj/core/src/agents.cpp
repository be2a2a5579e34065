#include "herdsim/agents.hpp"

#include <cmath>

#include "herdsim/error.hpp"

namespace herdsim {

SyntheticParams SyntheticParams::defaults() {
  SyntheticParams p;
  p.alpha = 0.55;
  p.temperature = 1.0;
  p.persona_gains = {
      {Persona::Tier::None, 1.0},      {Persona::Tier::Graduate, 2.0},
      {Persona::Tier::College, 1.4},   {Persona::Tier::HighSchool, 0.4},
      {Persona::Tier::Employer, 1.8},  {Persona::Tier::Employee, 1.2},
      {Persona::Tier::InDomain, 1.8},  {Persona::Tier::OutOfDomain, 0.9},
  };
  p.format_gains = {
      {PresentationFormat::Count, 1.1},  {PresentationFormat::Ratio, 1.15},
      {PresentationFormat::List, 1.0},   {PresentationFormat::Disc, 0.5},
      {PresentationFormat::Reason, 1.6},
  };
  p.order_gain = 1.4;
  return p;
}

void SyntheticParams::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("synthetic alpha must be >= 0");
  if (!(temperature > 0.0)) throw ConfigError("synthetic temperature must be > 0");
  for (const auto& [tier, gain] : persona_gains) {
    if (!(gain > 0.0))
      throw ConfigError("persona gain for " + to_string(tier) + " must be > 0");
  }
  for (const auto& [format, gain] : format_gains) {
    if (!(gain > 0.0))
      throw ConfigError("format gain for " + to_string(format) + " must be > 0");
  }
  if (!(order_gain > 0.0)) throw ConfigError("order gain must be > 0");
}

double SyntheticParams::persona_gain(Persona::Tier t) const {
  auto it = persona_gains.find(t);
  if (it == persona_gains.end())
    throw ConfigError("no persona gain configured for tier " + to_string(t));
  return it->second;
}

double SyntheticParams::format_gain(PresentationFormat f) const {
  auto it = format_gains.find(f);
  if (it == format_gains.end())
    throw ConfigError("no format gain configured for " + to_string(f));
  return it->second;
}

SyntheticAgent::SyntheticAgent(SyntheticParams params, std::uint64_t seed)
    : params_(std::move(params)), seed_(seed) {
  params_.validate();
}

void SyntheticAgent::set_base_logits(const std::string& question_id,
                                     LogitVector logits) {
  explicit_logits_[question_id] = std::move(logits);
}

LogitVector SyntheticAgent::base_logits(const Question& q) const {
  auto it = explicit_logits_.find(q.id);
  if (it != explicit_logits_.end()) return it->second;
  Rng rng(seed_, {"synthetic.base", q.id});
  LogitVector base;
  for (char label : q.labels()) base.logits[label] = rng.next_gaussian();
  return base;
}

LogitVector SyntheticAgent::question_logits(const Question& q) const {
  return base_logits(q);
}

LogitVector SyntheticAgent::revised_logits(const Question& q,
                                           const PeerContext& ctx) const {
  for (const auto& op : ctx.panel.agreeing)
    if (!q.has_label(op.choice))
      throw ValidationError(q.id, "panel label outside question labels");
  for (const auto& op : ctx.panel.disagreeing)
    if (!q.has_label(op.choice))
      throw ValidationError(q.id, "panel label outside question labels");
  return conformity_update(*this, base_logits(q), ctx.panel, ctx.format,
                           ctx.panel.order);
}

std::string SyntheticAgent::reason_for(const Question&, char choice) const {
  return std::string("supports ") + choice + " based on its reading of the question";
}

std::optional<char> SyntheticAgent::chain_of_thought_answer(
    const Question& q, std::uint64_t sample_seed) const {
  // CoT is defined as identical to the Original condition for synthetic
  // agents: the same tau=1 draw from the same stream.
  Rng rng(sample_seed);
  return sample_choice(softmax_confidence(base_logits(q), 1.0), rng);
}

LogitVector conformity_update(const SyntheticAgent& agent, const LogitVector& base,
                              const PeerPanel& panel,
                              std::optional<PresentationFormat> format,
                              PresentationOrder order) {
  const auto& params = agent.params();
  const double fmt_gain = format ? params.format_gain(*format) : 1.0;

  LogitVector updated = base;
  auto apply = [&](const PeerOpinion& op, bool disagreeing) {
    auto it = updated.logits.find(op.choice);
    if (it == updated.logits.end())
      throw ValidationError(std::string(1, op.choice),
                            "panel label outside base logit labels");
    double w = params.alpha * params.persona_gain(op.persona.tier) * fmt_gain;
    if (disagreeing && order == PresentationOrder::DisagreeFirst)
      w *= params.order_gain;
    it->second += w;
  };
  for (const auto& op : panel.agreeing) apply(op, false);
  for (const auto& op : panel.disagreeing) apply(op, true);
  return updated;
}

Response original_response(const AgentModel& agent, const Question& q) {
  return make_response(agent.question_logits(q), agent.temperature());
}

Response revised_response(const AgentModel& agent, const Question& q,
                          const PeerContext& ctx) {
  return make_response(agent.revised_logits(q, ctx), agent.temperature());
}

std::string generate_reason(const AgentModel& agent, const Question& q, char choice) {
  if (!q.has_label(choice))
    throw ValidationError(q.id, "reason requested for a label the question lacks");
  return agent.reason_for(q, choice);
}

}  // namespace herdsim
