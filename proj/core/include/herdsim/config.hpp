#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "herdsim/agents.hpp"
#include "herdsim/gateway.hpp"
#include "herdsim/protocols.hpp"

namespace herdsim {

enum class ExperimentKind { Dyadic, Grid, Control };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct SyntheticBackend {
  SyntheticParams params;
};

struct GatewayBackend {
  std::string model_id;
  std::string url;  // HERDSIM_GATEWAY_URL overrides
  double temperature = 1.0;
  GatewayLimits limits;
  std::string reason_cache_dir;
};

struct RunConfig {
  ExperimentKind experiment = ExperimentKind::Dyadic;
  std::vector<std::string> benchmark_paths;
  std::variant<SyntheticBackend, GatewayBackend> backend;

  std::vector<DyadicCondition> dyadic_conditions;        // dyadic
  std::vector<PresentationFormat> formats;               // grid
  std::vector<PresentationOrder> orders;                 // grid
  int grid_max = 5;                                      // grid
  std::vector<ControlCondition> control_conditions;      // control
  double contentious_threshold = 0.8;                    // control

  std::optional<std::size_t> sample;  // per-benchmark question cap
  int n_bins = 10;
  std::uint64_t seed = 0;
  std::string output_dir;
  int workers = 1;

  bool is_synthetic() const { return std::holds_alternative<SyntheticBackend>(backend); }
};

/// Parses and validates; accumulates every violation into `errors` instead
/// of stopping at the first.
RunConfig parse_run_config(const nlohmann::json& j, std::vector<std::string>& errors);

/// Throws ConfigError listing all violations.
RunConfig load_run_config(const std::string& path);

/// The raw file bytes (for the manifest's config hash).
std::string read_file_bytes(const std::string& path);

/// FNV-1a 64-bit hash, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace herdsim
