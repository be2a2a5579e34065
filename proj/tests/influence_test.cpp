#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "herdsim/error.hpp"
#include "herdsim/influence.hpp"
#include "herdsim/rng.hpp"

using namespace herdsim;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing golden file: " << p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::filesystem::path kGoldenDir = HERDSIM_GOLDEN_DIR;

PeerPanel grid_panel(int agree, int disagree, PresentationOrder order,
                     PresentationFormat format) {
  PeerPanel panel = build_panel('A', 'B', agree, disagree, order, Persona::none());
  if (format == PresentationFormat::Reason) {
    for (auto& op : panel.agreeing)
      op.reason = std::string("supports ") + op.choice +
                  " based on its reading of the question";
    for (auto& op : panel.disagreeing)
      op.reason = std::string("supports ") + op.choice +
                  " based on its reading of the question";
  }
  return panel;
}

}  // namespace

TEST_CASE("peer selection follows the rank definitions") {
  const ChoiceDistribution dist{{{'A', 0.5}, {'B', 0.3}, {'C', 0.2}}};
  CHECK(select_peer_opinion(dist, PeerCondition::First, 0) == 'A');
  CHECK(select_peer_opinion(dist, PeerCondition::Second, 0) == 'B');
  CHECK(select_peer_opinion(dist, PeerCondition::Last, 0) == 'C');
}

TEST_CASE("peer selection breaks rank ties toward the lower label") {
  const ChoiceDistribution dist{{{'A', 0.4}, {'B', 0.4}, {'C', 0.2}}};
  CHECK(select_peer_opinion(dist, PeerCondition::First, 0) == 'A');
  CHECK(select_peer_opinion(dist, PeerCondition::Second, 0) == 'B');
  CHECK(select_peer_opinion(dist, PeerCondition::Last, 0) == 'C');
}

TEST_CASE("random peer selection matches the distribution over seeds") {
  const ChoiceDistribution dist{{{'A', 0.5}, {'B', 0.3}, {'C', 0.2}}};
  // Deterministic per seed.
  CHECK(select_peer_opinion(dist, PeerCondition::Random, 99) ==
        select_peer_opinion(dist, PeerCondition::Random, 99));

  std::map<char, int> counts;
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed)
    ++counts[select_peer_opinion(dist, PeerCondition::Random, seed)];
  CHECK(counts['A'] / double(n) == doctest::Approx(0.5).epsilon(0.04));
  CHECK(counts['B'] / double(n) == doctest::Approx(0.3).epsilon(0.067));
  CHECK(counts['C'] / double(n) == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("peer selection needs a distinct alternative") {
  const ChoiceDistribution dist{{{'A', 1.0}}};
  CHECK(select_peer_opinion(dist, PeerCondition::First, 0) == 'A');
  CHECK_THROWS_AS(select_peer_opinion(dist, PeerCondition::Second, 0), ValidationError);
  CHECK_THROWS_AS(select_peer_opinion(dist, PeerCondition::Last, 0), ValidationError);
}

TEST_CASE("ranked confidences are strictly ordered for distinct probabilities") {
  Rng rng(321);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(rng.next_below(7));
    ChoiceDistribution dist;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      const double w = 0.05 + rng.next_double();
      dist.probs[static_cast<char>('A' + i)] = w;
      sum += w;
    }
    for (auto& [label, p] : dist.probs) p /= sum;
    const auto ranked = ranked_labels(dist);
    REQUIRE(ranked.size() == dist.probs.size());
    for (std::size_t i = 0; i + 1 < ranked.size(); ++i)
      CHECK(dist.at(ranked[i]) >= dist.at(ranked[i + 1]));
    CHECK(select_peer_opinion(dist, PeerCondition::First, 0) == dist.argmax());
  }
}

TEST_CASE("persona templates render byte-exactly") {
  CHECK(render_persona(Persona::education(Persona::Tier::Graduate), 'B') ==
        "Agent A's highest degree is graduate degree. Agent A thinks the answer is B.");
  CHECK(render_persona(Persona::education(Persona::Tier::College), 'B') ==
        "Agent A's highest degree is college degree. Agent A thinks the answer is B.");
  CHECK(render_persona(Persona::education(Persona::Tier::HighSchool), 'B') ==
        "Agent A's highest degree is high school diploma. Agent A thinks the answer is B.");
  CHECK(render_persona(Persona{Persona::Tier::Employer, {}}, 'C') ==
        "Your employer thinks the answer is C.");
  CHECK(render_persona(Persona{Persona::Tier::Employee, {}}, 'C') ==
        "Your employee thinks the answer is C.");
  CHECK(render_persona(Persona::in_domain("physics"), 'A') ==
        "Agent A is an expert in physics domain. Agent A thinks the answer is A.");
  CHECK(render_persona(Persona::none(), 'B') == "Agent A thinks the answer is B.");
}

TEST_CASE("panel rendering matches the documented examples") {
  CHECK(render_panel(grid_panel(3, 1, PresentationOrder::AgreeFirst,
                                PresentationFormat::Count),
                     PresentationFormat::Count) ==
        "3 agents think the answer is A.\n1 agent thinks the answer is B.");

  CHECK(render_panel(grid_panel(1, 3, PresentationOrder::DisagreeFirst,
                                PresentationFormat::Ratio),
                     PresentationFormat::Ratio) ==
        "Among 4 agents,\n75% think the answer is B.\nAmong 4 agents,\n25% think "
        "the answer is A.");

  CHECK(render_panel(grid_panel(1, 1, PresentationOrder::AgreeFirst,
                                PresentationFormat::Disc),
                     PresentationFormat::Disc) ==
        "Agent A think the answer is A.\nAgent B think the answer is B.");

  CHECK(render_panel(grid_panel(3, 1, PresentationOrder::AgreeFirst,
                                PresentationFormat::List),
                     PresentationFormat::List) ==
        "Agent A, B, and C think the answer is A.\nAgent D think the answer is B.");
}

TEST_CASE("reason format requires reasons") {
  PeerPanel panel = build_panel('A', 'B', 1, 1, PresentationOrder::AgreeFirst,
                                Persona::none());
  CHECK_THROWS_AS(render_panel(panel, PresentationFormat::Reason), ValidationError);
}

TEST_CASE("build_panel assigns names in presentation order") {
  const auto agree_first =
      build_panel('A', 'B', 2, 0, PresentationOrder::AgreeFirst, Persona::none());
  REQUIRE(agree_first.agreeing.size() == 2);
  CHECK(agree_first.agreeing[0].agent_name == "Agent A");
  CHECK(agree_first.agreeing[1].agent_name == "Agent B");

  const auto disagree_first =
      build_panel('A', 'B', 1, 1, PresentationOrder::DisagreeFirst, Persona::none());
  REQUIRE(disagree_first.disagreeing.size() == 1);
  REQUIRE(disagree_first.agreeing.size() == 1);
  CHECK(disagree_first.disagreeing[0].agent_name == "Agent A");
  CHECK(disagree_first.agreeing[0].agent_name == "Agent B");

  CHECK_THROWS_AS(
      build_panel('A', 'A', 1, 1, PresentationOrder::AgreeFirst, Persona::none()),
      ValidationError);
  CHECK_THROWS_AS(
      build_panel('A', 'B', 0, 0, PresentationOrder::AgreeFirst, Persona::none()),
      ValidationError);
}

TEST_CASE("golden prompt corpus is byte-stable") {
  const PresentationFormat formats[] = {
      PresentationFormat::Count, PresentationFormat::Ratio, PresentationFormat::List,
      PresentationFormat::Disc, PresentationFormat::Reason};
  const PresentationOrder orders[] = {PresentationOrder::AgreeFirst,
                                      PresentationOrder::DisagreeFirst};
  int checked = 0;
  for (const auto format : formats) {
    for (const auto order : orders) {
      for (int agree = 0; agree <= 5; ++agree) {
        for (int disagree = 0; disagree <= 5; ++disagree) {
          if (agree == 0 && disagree == 0) continue;
          const std::string name = to_string(format) + "_" + to_string(order) + "_" +
                                   std::to_string(agree) + "a_" +
                                   std::to_string(disagree) + "d.txt";
          const std::string expected = read_file(kGoldenDir / "prompts" / name);
          CHECK_MESSAGE(render_panel(grid_panel(agree, disagree, order, format),
                                     format) == expected,
                        "golden mismatch: " << name);
          ++checked;
        }
      }
    }
  }
  CHECK(checked == 350);
}

TEST_CASE("persona golden corpus is byte-stable") {
  const std::pair<std::string, std::pair<Persona, char>> cases[] = {
      {"none", {Persona::none(), 'B'}},
      {"graduate_degree", {Persona::education(Persona::Tier::Graduate), 'B'}},
      {"college_degree", {Persona::education(Persona::Tier::College), 'B'}},
      {"high_school_diploma", {Persona::education(Persona::Tier::HighSchool), 'B'}},
      {"employer", {Persona{Persona::Tier::Employer, {}}, 'C'}},
      {"employee", {Persona{Persona::Tier::Employee, {}}, 'C'}},
      {"in_domain", {Persona::in_domain("physics"), 'A'}},
      {"out_of_domain", {Persona::out_of_domain("chemistry"), 'A'}},
  };
  for (const auto& [name, args] : cases) {
    CHECK(render_persona(args.first, args.second) ==
          read_file(kGoldenDir / "personas" / (name + ".txt")));
  }
}

TEST_CASE("order swap permutes blocks but keeps the opinion multiset") {
  for (int agree = 0; agree <= 5; ++agree) {
    for (int disagree = 0; disagree <= 5; ++disagree) {
      if (agree == 0 && disagree == 0) continue;
      const auto a = build_panel('A', 'B', agree, disagree,
                                 PresentationOrder::AgreeFirst, Persona::none());
      const auto d = build_panel('A', 'B', agree, disagree,
                                 PresentationOrder::DisagreeFirst, Persona::none());
      std::multiset<std::pair<char, std::string>> ma, md;
      auto collect = [](const PeerPanel& p, auto& out) {
        for (const auto& op : p.agreeing) out.insert({op.choice, to_string(op.persona.tier)});
        for (const auto& op : p.disagreeing) out.insert({op.choice, to_string(op.persona.tier)});
      };
      collect(a, ma);
      collect(d, md);
      CHECK(ma == md);
    }
  }
}

TEST_CASE("ratio percentages sum to 100 up to the half-up rounding rule") {
  // Half-up rounding makes both 37.5/62.5 halves round up, so the (3,5) and
  // (5,3) cells sum to 101; every other grid cell sums to exactly 100.
  for (int agree = 1; agree <= 5; ++agree) {
    for (int disagree = 1; disagree <= 5; ++disagree) {
      const int total = agree + disagree;
      const int sum = percent_half_up(agree, total) + percent_half_up(disagree, total);
      if ((agree == 3 && disagree == 5) || (agree == 5 && disagree == 3)) {
        CHECK(sum == 101);
      } else {
        CHECK(sum == 100);
      }
    }
  }
  CHECK(percent_half_up(3, 4) == 75);
  CHECK(percent_half_up(1, 4) == 25);
  CHECK(percent_half_up(1, 8) == 13);  // 12.5 rounds half-up
}

TEST_CASE("multi-label disagreeing panels render one block per label") {
  PeerPanel panel;
  panel.order = PresentationOrder::AgreeFirst;
  panel.agreeing.push_back({"Agent A", 'A', Persona::none(), std::nullopt});
  panel.disagreeing.push_back({"Agent B", 'B', Persona::none(), std::nullopt});
  panel.disagreeing.push_back({"Agent C", 'B', Persona::none(), std::nullopt});
  panel.disagreeing.push_back({"Agent D", 'C', Persona::none(), std::nullopt});
  CHECK(render_panel(panel, PresentationFormat::Count) ==
        "1 agent thinks the answer is A.\n2 agents think the answer is B.\n1 agent "
        "thinks the answer is C.");
  CHECK(render_panel(panel, PresentationFormat::Ratio) ==
        "Among 4 agents,\n25% think the answer is A.\nAmong 4 agents,\n50% think "
        "the answer is B.\nAmong 4 agents,\n25% think the answer is C.");
}

TEST_CASE("panel persona decoration composes with Disc and Reason lines") {
  PeerPanel panel;
  panel.order = PresentationOrder::AgreeFirst;
  panel.disagreeing.push_back(
      {"Agent A", 'B', Persona::education(Persona::Tier::Graduate), std::nullopt});
  CHECK(render_panel(panel, PresentationFormat::Disc) ==
        "Agent A's highest degree is graduate degree. Agent A thinks the answer is B.");

  panel.disagreeing[0].reason = "it fits";
  CHECK(render_panel(panel, PresentationFormat::Reason) ==
        "Agent A's highest degree is graduate degree. Agent A thinks the answer is "
        "B, because it fits.");
}
