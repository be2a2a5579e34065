#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "herdsim/dataset.hpp"
#include "herdsim/distribution.hpp"
#include "herdsim/influence.hpp"

namespace herdsim {

// Context an agent revises under: the rendered peer block exactly as a
// gateway model would see it, plus the structural view synthetic agents
// condition on. `format` is absent for dyadic peer statements (format
// gain 1).
struct PeerContext {
  PeerPanel panel;
  std::string rendered;
  std::optional<PresentationFormat> format;
  std::optional<std::string> system_prompt;
};

// The shared generation distribution: given a question and optional peer
// context, yields unnormalized logits over the question's labels.
// Implementations must be deterministic for fixed inputs and safe for
// concurrent read-only use.
class AgentModel {
 public:
  virtual ~AgentModel() = default;

  virtual LogitVector question_logits(const Question& q) const = 0;
  virtual LogitVector revised_logits(const Question& q, const PeerContext& ctx) const = 0;

  /// Confidence temperature (> 0) used to map logits to distributions.
  virtual double temperature() const = 0;

  virtual std::string model_id() const = 0;

  /// One-to-three-sentence justification for the given choice.
  virtual std::string reason_for(const Question& q, char choice) const = 0;

  /// Chain-of-thought answer; nullopt = abstention. `sample_seed` lets
  /// synthetic agents reproduce the Original condition's tau=1 draw.
  virtual std::optional<char> chain_of_thought_answer(const Question& q,
                                                      std::uint64_t sample_seed) const = 0;
};

struct SyntheticParams {
  double alpha = 0.55;       // peer influence weight, >= 0
  double temperature = 1.0;  // confidence temperature, > 0
  std::map<Persona::Tier, double> persona_gains;
  std::map<PresentationFormat, double> format_gains;
  double order_gain = 1.25;  // applied to disagreeing opinions when shown first

  static SyntheticParams defaults();

  /// Throws ConfigError listing the offending field.
  void validate() const;

  double persona_gain(Persona::Tier t) const;
  double format_gain(PresentationFormat f) const;
};

// Desk-scale stand-in for an LLM: per-question base logits drawn from the
// stream (seed, "synthetic.base", question id) as iid standard normals, and
// an additive conformity kernel in logit space (see conformity_update).
class SyntheticAgent : public AgentModel {
 public:
  SyntheticAgent(SyntheticParams params, std::uint64_t seed);

  /// Pin explicit logits for a question (test setup); overrides the seeded draw.
  void set_base_logits(const std::string& question_id, LogitVector logits);

  LogitVector base_logits(const Question& q) const;

  LogitVector question_logits(const Question& q) const override;
  LogitVector revised_logits(const Question& q, const PeerContext& ctx) const override;
  double temperature() const override { return params_.temperature; }
  std::string model_id() const override { return "synthetic"; }
  std::string reason_for(const Question& q, char choice) const override;
  std::optional<char> chain_of_thought_answer(const Question& q,
                                              std::uint64_t sample_seed) const override;

  const SyntheticParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

 private:
  SyntheticParams params_;
  std::uint64_t seed_;
  std::map<std::string, LogitVector> explicit_logits_;
};

/// Additive conformity kernel: each peer opinion on label r adds
/// alpha * persona_gain * format_gain (* order_gain for disagreeing opinions
/// under DisagreeFirst) to base[r]. Absent format means gain 1.
LogitVector conformity_update(const SyntheticAgent& agent, const LogitVector& base,
                              const PeerPanel& panel,
                              std::optional<PresentationFormat> format,
                              PresentationOrder order);

/// r' = argmax P(r|q): response from the agent's question-only logits.
Response original_response(const AgentModel& agent, const Question& q);

/// r^h = argmax P(r|q, R_-i): response under the peer context.
Response revised_response(const AgentModel& agent, const Question& q,
                          const PeerContext& ctx);

/// Justification for `choice` on `q`; errors if choice is not a label of q.
std::string generate_reason(const AgentModel& agent, const Question& q, char choice);

}  // namespace herdsim
