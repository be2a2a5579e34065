#pragma once

#include <string>

#include "herdsim/config.hpp"
#include "herdsim/protocols.hpp"

namespace herdsim {

struct RunArtifacts {
  std::string manifest_path;
  std::string records_path;
  std::string summary_path;
  RunStats stats;
  std::size_t record_count = 0;
};

/// Executes the configured experiment and writes manifest.json,
/// records.jsonl and summary.csv under config.output_dir. `config_bytes`
/// is the raw config file content, hashed into the manifest.
RunArtifacts run_experiment(const RunConfig& config, const std::string& config_bytes);

/// Builds the configured agent backend. Gateway URL/credentials come from
/// HERDSIM_GATEWAY_URL / HERDSIM_API_KEY (overriding the config url).
std::shared_ptr<const AgentModel> make_agent(const RunConfig& config);

/// Per-format/order flip rates with the Pearson correlations of the flip
/// indicator against n_agree, n_disagree and their difference.
std::string format_table_csv(const std::vector<TrialRecord>& records);

}  // namespace herdsim
