#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "herdsim/config.hpp"
#include "herdsim/report.hpp"
#include "herdsim/runner.hpp"

using namespace herdsim;

int main(int argc, char** argv) {
  CLI::App app{"herdsim: herd-behavior simulation harness for multi-agent "
               "multiple-choice decision-making"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> benchmark_overrides;
  auto* run_cmd = app.add_subcommand("run", "Execute an experiment from a config file");
  run_cmd->add_option("--config", config_path, "JSON run configuration")->required();
  run_cmd->add_option("--benchmark", benchmark_overrides,
                      "benchmark file in the normalized schema; repeatable, "
                      "overrides the config's benchmark list");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Validate a config file");
  validate_cmd->add_option("--config", validate_path, "JSON run configuration")->required();

  std::string records_path, kind_name, out_dir;
  int n_bins = 10;
  auto* report_cmd = app.add_subcommand("report", "Render tables and figures from records");
  report_cmd->add_option("--records", records_path, "records.jsonl from a run")->required();
  report_cmd->add_option("--kind", kind_name,
                         "flip-table | heatmap | grid-heatmap | control-table")
      ->required();
  report_cmd->add_option("--out", out_dir, "output directory")->required();
  report_cmd->add_option("--bins", n_bins, "heatmap bin count (default 10)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const std::string bytes = read_file_bytes(config_path);
      RunConfig config = load_run_config(config_path);
      if (!benchmark_overrides.empty()) config.benchmark_paths = benchmark_overrides;
      const RunArtifacts artifacts = run_experiment(config, bytes);
      std::cout << "wrote " << artifacts.records_path << " ("
                << artifacts.record_count << " records)\n"
                << "wrote " << artifacts.summary_path << "\n"
                << "wrote " << artifacts.manifest_path << "\n";
      if (artifacts.stats.errors > 0)
        std::cout << artifacts.stats.errors << " questions errored (within budget)\n";
      return 0;
    }
    if (*validate_cmd) {
      load_run_config(validate_path);
      std::cout << "config ok\n";
      return 0;
    }
    if (*report_cmd) {
      const auto kind = report_kind_from_string(kind_name);
      for (const auto& path : write_report(records_path, kind, out_dir, n_bins))
        std::cout << "wrote " << path << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
