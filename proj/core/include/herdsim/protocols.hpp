#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "herdsim/agents.hpp"
#include "herdsim/records.hpp"

namespace herdsim {

// One cell of the dyadic study: either a raw peer condition, or a persona
// manipulation (which voices the 2nd-ranked response for strongest signal).
struct DyadicCondition {
  std::optional<PeerCondition> peer;
  std::optional<Persona::Tier> persona;

  static DyadicCondition peer_cond(PeerCondition c) { return {c, std::nullopt}; }
  static DyadicCondition persona_cond(Persona::Tier t) { return {std::nullopt, t}; }
  static DyadicCondition from_name(const std::string& name);

  std::string name() const;
  void validate() const;  // exactly one of peer/persona
};

/// The four raw peer conditions plus all persona tiers, in report order.
std::vector<DyadicCondition> default_dyadic_conditions();

struct RunStats {
  int questions = 0;    // questions attempted
  int errors = 0;       // questions dropped by agent failures
  int skipped = 0;      // condition/question pairs skipped (e.g. no domain tag)
  int abstentions = 0;  // CoT answers that failed to parse after retry
};

struct DriverOptions {
  std::uint64_t seed = 0;
  int workers = 1;
  double error_budget = 0.1;  // fail the run if more than this fraction of questions error
};

/// The two-agent confidence study: per question and condition, original
/// response, one rendered peer statement, revised response.
std::vector<TrialRecord> run_dyadic(const Benchmark& benchmark,
                                    const AgentModel& agent,
                                    const std::vector<DyadicCondition>& conditions,
                                    const DriverOptions& options,
                                    RunStats* stats = nullptr);

/// The agree/disagree format grid: every (format, order, n_agree, n_disagree)
/// cell in [0, grid_max]^2 minus (0,0); disagreeing peers voice the
/// 2nd-ranked label.
std::vector<TrialRecord> run_group_grid(
    const Benchmark& benchmark, const AgentModel& agent,
    const std::vector<PresentationFormat>& formats,
    const std::vector<PresentationOrder>& orders, int grid_max,
    const DriverOptions& options, RunStats* stats = nullptr);

/// The five-agent controllability protocol: tau=1 initial answers, then a
/// single simultaneous revision round rendered per condition (tau=0 greedy).
std::vector<GroupOutcome> run_control(
    const Benchmark& benchmark,
    const std::vector<std::shared_ptr<const AgentModel>>& agents,
    ControlCondition condition, const DriverOptions& options,
    RunStats* stats = nullptr);

/// "Please be agreeable" / "Please be stubborn"; nullopt otherwise.
std::optional<std::string> control_system_prompt(ControlCondition condition);

/// Presentation style of a control condition; Baseline and the prompt
/// conditions draw uniformly from the seeded per-question stream.
struct ControlStyle {
  PresentationFormat format;
  PresentationOrder order;
  Persona::Tier persona;
};
ControlStyle control_style(ControlCondition condition, std::uint64_t seed,
                           const std::string& question_id);

}  // namespace herdsim
