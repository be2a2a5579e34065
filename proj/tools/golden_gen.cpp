// Regenerates the golden prompt corpus: every (format, order, n_agree,
// n_disagree) panel rendering on the [0,5]^2 grid plus all persona
// templates. The committed corpus under tests/golden/ is the reference;
// rerun this only when the templates intentionally change.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "herdsim/influence.hpp"

using namespace herdsim;

namespace {

void write(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: golden_gen <output-dir>\n";
    return 1;
  }
  namespace fs = std::filesystem;
  const fs::path root(argv[1]);
  fs::create_directories(root / "prompts");
  fs::create_directories(root / "personas");

  const PresentationFormat formats[] = {
      PresentationFormat::Count, PresentationFormat::Ratio, PresentationFormat::List,
      PresentationFormat::Disc, PresentationFormat::Reason};
  const PresentationOrder orders[] = {PresentationOrder::AgreeFirst,
                                      PresentationOrder::DisagreeFirst};

  int prompt_count = 0;
  for (const auto format : formats) {
    for (const auto order : orders) {
      for (int agree = 0; agree <= 5; ++agree) {
        for (int disagree = 0; disagree <= 5; ++disagree) {
          if (agree == 0 && disagree == 0) continue;
          PeerPanel panel = build_panel('A', 'B', agree, disagree, order,
                                        Persona::none());
          if (format == PresentationFormat::Reason) {
            for (auto& op : panel.agreeing)
              op.reason = std::string("supports ") + op.choice +
                          " based on its reading of the question";
            for (auto& op : panel.disagreeing)
              op.reason = std::string("supports ") + op.choice +
                          " based on its reading of the question";
          }
          const std::string name = to_string(format) + "_" + to_string(order) + "_" +
                                   std::to_string(agree) + "a_" +
                                   std::to_string(disagree) + "d.txt";
          write(root / "prompts" / name, render_panel(panel, format));
          ++prompt_count;
        }
      }
    }
  }

  int persona_count = 0;
  auto persona_file = [&](const std::string& name, const Persona& p, char choice) {
    write(root / "personas" / (name + ".txt"), render_persona(p, choice));
    ++persona_count;
  };
  persona_file("none", Persona::none(), 'B');
  persona_file("graduate_degree", Persona::education(Persona::Tier::Graduate), 'B');
  persona_file("college_degree", Persona::education(Persona::Tier::College), 'B');
  persona_file("high_school_diploma", Persona::education(Persona::Tier::HighSchool), 'B');
  persona_file("employer", Persona{Persona::Tier::Employer, {}}, 'C');
  persona_file("employee", Persona{Persona::Tier::Employee, {}}, 'C');
  persona_file("in_domain", Persona::in_domain("physics"), 'A');
  persona_file("out_of_domain", Persona::out_of_domain("chemistry"), 'A');

  std::cout << "wrote " << prompt_count << " prompt files and " << persona_count
            << " persona files under " << root << "\n";
  return 0;
}
