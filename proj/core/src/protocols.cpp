#include "herdsim/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include "herdsim/error.hpp"
#include "herdsim/metrics.hpp"

namespace herdsim {

namespace {

// Runs fn(i) for i in [0, n); questions are independent work units and all
// randomness comes from per-question substreams, so scheduling order does
// not affect results.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (nw == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> threads;
  threads.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

char greedy_choice(const LogitVector& logits) {
  return make_response(logits, 1.0).choice;  // argmax is temperature-invariant
}

void check_error_budget(const RunStats& stats, double budget) {
  if (stats.questions > 0 &&
      stats.errors > budget * static_cast<double>(stats.questions)) {
    throw Error("run failed: " + std::to_string(stats.errors) + " of " +
                std::to_string(stats.questions) + " questions errored (budget " +
                std::to_string(budget) + ")");
  }
}

}  // namespace

DyadicCondition DyadicCondition::from_name(const std::string& name) {
  if (name == "1st" || name == "2nd" || name == "rnd" || name == "last")
    return peer_cond(peer_condition_from_string(name));
  return persona_cond(persona_tier_from_string(name));
}

std::string DyadicCondition::name() const {
  if (peer) return to_string(*peer);
  return to_string(*persona);
}

void DyadicCondition::validate() const {
  if (peer.has_value() == persona.has_value())
    throw ConfigError("dyadic condition must be exactly one of peer/persona");
  if (persona && *persona == Persona::Tier::None)
    throw ConfigError("persona condition cannot be 'none'");
}

std::vector<DyadicCondition> default_dyadic_conditions() {
  using T = Persona::Tier;
  std::vector<DyadicCondition> out;
  for (auto c : {PeerCondition::First, PeerCondition::Second, PeerCondition::Random,
                 PeerCondition::Last})
    out.push_back(DyadicCondition::peer_cond(c));
  for (auto t : {T::Graduate, T::College, T::HighSchool, T::Employer, T::Employee,
                 T::InDomain, T::OutOfDomain})
    out.push_back(DyadicCondition::persona_cond(t));
  return out;
}

namespace {

// Resolves the persona instance for a dyadic condition on a question.
// Expertise tiers need the question's domain; OutOfDomain draws a different
// domain from the benchmark's set. Returns nullopt when the condition does
// not apply to this question.
std::optional<Persona> resolve_persona(const DyadicCondition& cond,
                                       const Question& q,
                                       const std::vector<std::string>& domains,
                                       std::uint64_t seed) {
  if (!cond.persona) return Persona::none();
  switch (*cond.persona) {
    case Persona::Tier::InDomain:
      if (!q.domain) return std::nullopt;
      return Persona::in_domain(*q.domain);
    case Persona::Tier::OutOfDomain: {
      if (!q.domain) return std::nullopt;
      std::vector<std::string> others;
      for (const auto& d : domains)
        if (d != *q.domain) others.push_back(d);
      if (others.empty()) return std::nullopt;
      Rng rng(seed, {"dyadic.out_of_domain", q.id});
      return Persona::out_of_domain(others[rng.next_below(others.size())]);
    }
    default:
      return Persona{*cond.persona, {}};
  }
}

}  // namespace

std::vector<TrialRecord> run_dyadic(const Benchmark& benchmark,
                                    const AgentModel& agent,
                                    const std::vector<DyadicCondition>& conditions,
                                    const DriverOptions& options, RunStats* stats) {
  for (const auto& c : conditions) c.validate();

  RunStats local;
  local.questions = static_cast<int>(benchmark.questions.size());
  std::mutex mu;
  std::vector<TrialRecord> records;

  parallel_for(benchmark.questions.size(), options.workers, [&](std::size_t qi) {
    const Question& q = benchmark.questions[qi];
    std::vector<TrialRecord> question_records;
    int question_skips = 0;
    try {
      const Response original = original_response(agent, q);
      for (const auto& cond : conditions) {
        const auto persona =
            resolve_persona(cond, q, benchmark.domains, options.seed);
        if (!persona) {
          ++question_skips;
          continue;
        }
        // Persona manipulations voice the 2nd response type.
        const PeerCondition pc = cond.peer ? *cond.peer : PeerCondition::Second;
        const char peer_label = select_peer_opinion(
            original.distribution, pc,
            Rng::derive_key(options.seed, {"dyadic", q.id}));

        PeerOpinion opinion;
        opinion.agent_name = "Agent A";
        opinion.choice = peer_label;
        opinion.persona = *persona;

        PeerContext ctx;
        ctx.rendered = render_persona(*persona, peer_label);
        ctx.format = std::nullopt;
        ctx.panel.order = PresentationOrder::AgreeFirst;
        if (peer_label == original.choice) {
          ctx.panel.agreeing.push_back(opinion);
        } else {
          ctx.panel.disagreeing.push_back(opinion);
        }

        const Response revised = revised_response(agent, q, ctx);

        TrialRecord rec;
        rec.question_id = q.id;
        rec.benchmark = benchmark.name;
        rec.model_id = agent.model_id();
        rec.condition = cond.peer
                            ? TrialCondition::peer_condition(*cond.peer)
                            : TrialCondition::persona_condition(*persona);
        rec.original = original;
        rec.peer_block = ctx.rendered;
        rec.revised = revised;
        rec.flip = revised.choice != original.choice ? 1 : 0;
        rec.self_confidence = original.confidence;
        rec.perceived_confidence = original.distribution.at(peer_label);
        question_records.push_back(std::move(rec));
      }
    } catch (const Error&) {
      std::lock_guard<std::mutex> lock(mu);
      ++local.errors;
      return;
    }
    std::lock_guard<std::mutex> lock(mu);
    local.skipped += question_skips;
    for (auto& r : question_records) records.push_back(std::move(r));
  });

  check_error_budget(local, options.error_budget);
  if (stats) *stats = local;
  return records;
}

std::vector<TrialRecord> run_group_grid(
    const Benchmark& benchmark, const AgentModel& agent,
    const std::vector<PresentationFormat>& formats,
    const std::vector<PresentationOrder>& orders, int grid_max,
    const DriverOptions& options, RunStats* stats) {
  if (grid_max < 1) throw ConfigError("grid_max must be >= 1");
  if (formats.empty() || orders.empty())
    throw ConfigError("grid run needs at least one format and one order");

  RunStats local;
  local.questions = static_cast<int>(benchmark.questions.size());
  std::mutex mu;
  std::vector<TrialRecord> records;

  parallel_for(benchmark.questions.size(), options.workers, [&](std::size_t qi) {
    const Question& q = benchmark.questions[qi];
    std::vector<TrialRecord> question_records;
    try {
      const Response original = original_response(agent, q);
      const char alternative =
          select_peer_opinion(original.distribution, PeerCondition::Second, 0);

      for (const auto format : formats) {
        for (const auto order : orders) {
          for (int agree = 0; agree <= grid_max; ++agree) {
            for (int disagree = 0; disagree <= grid_max; ++disagree) {
              if (agree == 0 && disagree == 0) continue;
              PeerPanel panel = build_panel(original.choice, alternative, agree,
                                            disagree, order, Persona::none());
              if (format == PresentationFormat::Reason) {
                for (auto& op : panel.agreeing)
                  op.reason = generate_reason(agent, q, op.choice);
                for (auto& op : panel.disagreeing)
                  op.reason = generate_reason(agent, q, op.choice);
              }
              PeerContext ctx;
              ctx.panel = std::move(panel);
              ctx.format = format;
              ctx.rendered = render_panel(ctx.panel, format);

              const Response revised = revised_response(agent, q, ctx);

              TrialRecord rec;
              rec.question_id = q.id;
              rec.benchmark = benchmark.name;
              rec.model_id = agent.model_id();
              rec.condition = TrialCondition::grid_cell(format, order, agree, disagree);
              rec.original = original;
              rec.peer_block = ctx.rendered;
              rec.revised = revised;
              rec.flip = revised.choice != original.choice ? 1 : 0;
              rec.self_confidence = original.confidence;
              rec.perceived_confidence = original.distribution.at(
                  disagree > 0 ? alternative : original.choice);
              question_records.push_back(std::move(rec));
            }
          }
        }
      }
    } catch (const Error&) {
      std::lock_guard<std::mutex> lock(mu);
      ++local.errors;
      return;
    }
    std::lock_guard<std::mutex> lock(mu);
    for (auto& r : question_records) records.push_back(std::move(r));
  });

  check_error_budget(local, options.error_budget);
  if (stats) *stats = local;
  return records;
}

std::optional<std::string> control_system_prompt(ControlCondition condition) {
  switch (condition) {
    case ControlCondition::StrongPrompt: return "Please be agreeable";
    case ControlCondition::WeakPrompt: return "Please be stubborn";
    default: return std::nullopt;
  }
}

ControlStyle control_style(ControlCondition condition, std::uint64_t seed,
                           const std::string& question_id) {
  switch (condition) {
    case ControlCondition::StrongFactors:
      return {PresentationFormat::Reason, PresentationOrder::DisagreeFirst,
              Persona::Tier::Graduate};
    case ControlCondition::WeakFactors:
      return {PresentationFormat::Disc, PresentationOrder::AgreeFirst,
              Persona::Tier::HighSchool};
    case ControlCondition::Baseline:
    case ControlCondition::StrongPrompt:
    case ControlCondition::WeakPrompt: {
      // Randomized presentation, shared by all five agents of a question.
      Rng rng(seed, {"control.style", question_id});
      static constexpr PresentationFormat kFormats[] = {
          PresentationFormat::Count, PresentationFormat::Ratio,
          PresentationFormat::List, PresentationFormat::Disc,
          PresentationFormat::Reason};
      const auto format = kFormats[rng.next_below(5)];
      const auto order = rng.next_below(2) == 0 ? PresentationOrder::AgreeFirst
                                                : PresentationOrder::DisagreeFirst;
      return {format, order, Persona::Tier::None};
    }
    default:
      throw ConfigError("condition " + to_string(condition) +
                        " has no presentation style");
  }
}

namespace {

// The other four answers grouped relative to agent `self`: the agreeing
// group first or last per `order`, disagreeing groups by descending size
// then label, names re-lettered from "Agent A" in presentation order.
PeerPanel control_panel(const std::vector<char>& initial, std::size_t self,
                        const ControlStyle& style) {
  const char own = initial[self];

  std::vector<char> peer_choices;
  for (std::size_t j = 0; j < initial.size(); ++j)
    if (j != self) peer_choices.push_back(initial[j]);

  std::map<char, int> group_sizes;
  for (char c : peer_choices)
    if (c != own) ++group_sizes[c];

  std::vector<char> group_order;
  for (const auto& [label, size] : group_sizes) group_order.push_back(label);
  std::sort(group_order.begin(), group_order.end(), [&](char a, char b) {
    if (group_sizes[a] != group_sizes[b]) return group_sizes[a] > group_sizes[b];
    return a < b;
  });

  const Persona persona{style.persona, {}};
  PeerPanel panel;
  panel.order = style.order;

  int name_index = 0;
  auto push = [&](std::vector<PeerOpinion>& side, char choice) {
    PeerOpinion op;
    op.agent_name = std::string("Agent ") + static_cast<char>('A' + name_index++);
    op.choice = choice;
    op.persona = persona;
    side.push_back(std::move(op));
  };
  auto push_agreeing = [&] {
    for (char c : peer_choices)
      if (c == own) push(panel.agreeing, c);
  };
  auto push_disagreeing = [&] {
    for (char label : group_order)
      for (char c : peer_choices)
        if (c == label) push(panel.disagreeing, c);
  };

  if (style.order == PresentationOrder::AgreeFirst) {
    push_agreeing();
    push_disagreeing();
  } else {
    push_disagreeing();
    push_agreeing();
  }
  return panel;
}

}  // namespace

std::vector<GroupOutcome> run_control(
    const Benchmark& benchmark,
    const std::vector<std::shared_ptr<const AgentModel>>& agents,
    ControlCondition condition, const DriverOptions& options, RunStats* stats) {
  if (agents.size() != 5) throw ConfigError("control protocol needs exactly 5 agents");
  for (const auto& a : agents) {
    if (!a) throw ConfigError("null agent");
    if (a->model_id() != agents.front()->model_id())
      throw ConfigError("control agents must share one model");
  }

  RunStats local;
  local.questions = static_cast<int>(benchmark.questions.size());
  std::mutex mu;
  std::vector<GroupOutcome> outcomes;

  parallel_for(benchmark.questions.size(), options.workers, [&](std::size_t qi) {
    const Question& q = benchmark.questions[qi];
    int question_abstentions = 0;
    GroupOutcome outcome;
    try {
      // Initial answers: tau=1 draws from condition-independent substreams,
      // so every condition sees the same initial population.
      std::vector<char> initial;
      if (condition == ControlCondition::CoT) {
        for (std::size_t i = 0; i < agents.size(); ++i) {
          const auto seed = Rng::derive_key(
              options.seed, {"control.initial", q.id, std::to_string(i)});
          const auto answer = agents[i]->chain_of_thought_answer(q, seed);
          if (answer) {
            initial.push_back(*answer);
          } else {
            ++question_abstentions;
          }
        }
        if (initial.size() < 2) {
          std::lock_guard<std::mutex> lock(mu);
          ++local.skipped;
          local.abstentions += question_abstentions;
          return;
        }
      } else {
        for (std::size_t i = 0; i < agents.size(); ++i) {
          Rng rng(options.seed, {"control.initial", q.id, std::to_string(i)});
          const auto dist = softmax_confidence(agents[i]->question_logits(q), 1.0);
          initial.push_back(sample_choice(dist, rng));
        }
      }

      std::vector<char> final_answers = initial;
      std::optional<int> flips;

      if (condition != ControlCondition::Original &&
          condition != ControlCondition::CoT) {
        const ControlStyle style = control_style(condition, options.seed, q.id);
        const auto system_prompt = control_system_prompt(condition);

        final_answers.clear();
        int flip_count = 0;
        for (std::size_t i = 0; i < agents.size(); ++i) {
          PeerContext ctx;
          ctx.panel = control_panel(initial, i, style);
          ctx.format = style.format;
          ctx.system_prompt = system_prompt;
          if (style.format == PresentationFormat::Reason) {
            for (auto& op : ctx.panel.agreeing)
              op.reason = generate_reason(*agents[i], q, op.choice);
            for (auto& op : ctx.panel.disagreeing)
              op.reason = generate_reason(*agents[i], q, op.choice);
          }
          ctx.rendered = render_panel(ctx.panel, style.format);

          // Revision at tau=0: greedy argmax over the revised logits.
          const char revised = greedy_choice(agents[i]->revised_logits(q, ctx));
          final_answers.push_back(revised);
          if (revised != initial[i]) ++flip_count;
        }
        flips = flip_count;
      }

      outcome.question_id = q.id;
      outcome.benchmark = benchmark.name;
      outcome.condition = condition;
      outcome.initial_answers = initial;
      outcome.final_answers = final_answers;
      outcome.flips = flips;
      outcome.entropy = answer_entropy(final_answers);
      const bool unanimous = std::all_of(
          final_answers.begin(), final_answers.end(),
          [&](char c) { return c == final_answers.front(); });
      outcome.consensus = unanimous ? 1 : 0;
      if (q.gold && question_abstentions == 0) {
        outcome.accuracy = (unanimous && final_answers.front() == *q.gold) ? 1 : 0;
      }
    } catch (const Error&) {
      std::lock_guard<std::mutex> lock(mu);
      ++local.errors;
      return;
    }
    std::lock_guard<std::mutex> lock(mu);
    local.abstentions += question_abstentions;
    outcomes.push_back(std::move(outcome));
  });

  check_error_budget(local, options.error_budget);
  if (stats) *stats = local;
  return outcomes;
}

}  // namespace herdsim
