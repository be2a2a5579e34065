#include "herdsim/config.hpp"

#include <fstream>
#include <sstream>

#include "herdsim/error.hpp"

namespace herdsim {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Dyadic: return "dyadic";
    case ExperimentKind::Grid: return "grid";
    case ExperimentKind::Control: return "control";
  }
  throw ConfigError("unknown experiment kind");
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "dyadic") return ExperimentKind::Dyadic;
  if (s == "grid") return ExperimentKind::Grid;
  if (s == "control") return ExperimentKind::Control;
  throw ConfigError("unknown experiment kind: " + s);
}

namespace {

template <typename T>
std::optional<T> get_opt(const json& j, const char* field,
                         std::vector<std::string>& errors) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    errors.push_back(std::string("field '") + field + "': " + e.what());
    return std::nullopt;
  }
}

SyntheticBackend parse_synthetic(const json& j, std::vector<std::string>& errors) {
  SyntheticBackend backend;
  backend.params = SyntheticParams::defaults();
  if (auto v = get_opt<double>(j, "alpha", errors)) backend.params.alpha = *v;
  if (auto v = get_opt<double>(j, "temperature", errors))
    backend.params.temperature = *v;
  if (auto v = get_opt<double>(j, "order_gain", errors)) backend.params.order_gain = *v;
  if (j.contains("persona_gains")) {
    for (const auto& [key, value] : j.at("persona_gains").items()) {
      try {
        backend.params.persona_gains[persona_tier_from_string(key)] =
            value.get<double>();
      } catch (const std::exception& e) {
        errors.push_back(std::string("persona_gains: ") + e.what());
      }
    }
  }
  if (j.contains("format_gains")) {
    for (const auto& [key, value] : j.at("format_gains").items()) {
      try {
        backend.params.format_gains[presentation_format_from_string(key)] =
            value.get<double>();
      } catch (const std::exception& e) {
        errors.push_back(std::string("format_gains: ") + e.what());
      }
    }
  }
  if (!(backend.params.alpha >= 0.0))
    errors.push_back("agent.alpha must be >= 0");
  if (!(backend.params.temperature > 0.0))
    errors.push_back("agent.temperature must be > 0");
  for (const auto& [tier, gain] : backend.params.persona_gains)
    if (!(gain > 0.0))
      errors.push_back("agent.persona_gains." + to_string(tier) + " must be > 0");
  for (const auto& [format, gain] : backend.params.format_gains)
    if (!(gain > 0.0))
      errors.push_back("agent.format_gains." + to_string(format) + " must be > 0");
  if (!(backend.params.order_gain > 0.0))
    errors.push_back("agent.order_gain must be > 0");
  return backend;
}

GatewayBackend parse_gateway(const json& j, std::vector<std::string>& errors) {
  GatewayBackend backend;
  if (auto v = get_opt<std::string>(j, "model", errors)) {
    backend.model_id = *v;
  } else {
    errors.push_back("gateway backend requires 'model'");
  }
  if (auto v = get_opt<std::string>(j, "url", errors)) backend.url = *v;
  if (auto v = get_opt<double>(j, "temperature", errors)) backend.temperature = *v;
  if (!(backend.temperature > 0.0)) errors.push_back("agent.temperature must be > 0");
  if (auto v = get_opt<int>(j, "max_in_flight", errors)) backend.limits.max_in_flight = *v;
  if (auto v = get_opt<double>(j, "requests_per_second", errors))
    backend.limits.requests_per_second = *v;
  if (auto v = get_opt<int>(j, "max_retries", errors)) backend.limits.max_retries = *v;
  if (auto v = get_opt<int>(j, "initial_backoff_ms", errors))
    backend.limits.initial_backoff_ms = *v;
  if (auto v = get_opt<int>(j, "top_logprobs", errors)) backend.limits.top_logprobs = *v;
  if (auto v = get_opt<int>(j, "timeout_s", errors)) backend.limits.timeout_s = *v;
  if (auto v = get_opt<std::string>(j, "reason_cache_dir", errors))
    backend.reason_cache_dir = *v;
  if (backend.limits.max_in_flight < 1) errors.push_back("agent.max_in_flight must be >= 1");
  if (!(backend.limits.requests_per_second > 0.0))
    errors.push_back("agent.requests_per_second must be > 0");
  if (backend.limits.max_retries < 0) errors.push_back("agent.max_retries must be >= 0");
  if (backend.limits.top_logprobs < 1) errors.push_back("agent.top_logprobs must be >= 1");
  return backend;
}

}  // namespace

RunConfig parse_run_config(const json& j, std::vector<std::string>& errors) {
  RunConfig config;

  if (auto v = get_opt<std::string>(j, "experiment", errors)) {
    try {
      config.experiment = experiment_kind_from_string(*v);
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  } else {
    errors.push_back("missing required field 'experiment'");
  }

  if (j.contains("benchmarks") && j.at("benchmarks").is_array()) {
    for (const auto& p : j.at("benchmarks")) {
      try {
        config.benchmark_paths.push_back(p.get<std::string>());
      } catch (const json::exception& e) {
        errors.push_back(std::string("benchmarks: ") + e.what());
      }
    }
  }
  if (config.benchmark_paths.empty())
    errors.push_back("at least one benchmark path is required");

  if (auto v = get_opt<std::uint64_t>(j, "seed", errors)) {
    config.seed = *v;
  } else {
    errors.push_back("missing required field 'seed'");
  }

  if (auto v = get_opt<std::string>(j, "output_dir", errors)) {
    config.output_dir = *v;
  } else {
    errors.push_back("missing required field 'output_dir'");
  }

  if (!j.contains("agent") || !j.at("agent").is_object()) {
    errors.push_back("missing required object 'agent'");
  } else {
    const json& agent = j.at("agent");
    const auto backend_name = get_opt<std::string>(agent, "backend", errors);
    if (!backend_name) {
      errors.push_back("agent.backend must be 'synthetic' or 'gateway'");
    } else if (*backend_name == "synthetic") {
      config.backend = parse_synthetic(agent, errors);
    } else if (*backend_name == "gateway") {
      config.backend = parse_gateway(agent, errors);
    } else {
      errors.push_back("agent.backend must be 'synthetic' or 'gateway', got '" +
                       *backend_name + "'");
    }
  }

  if (j.contains("conditions")) {
    for (const auto& c : j.at("conditions")) {
      try {
        config.dyadic_conditions.push_back(
            DyadicCondition::from_name(c.get<std::string>()));
      } catch (const std::exception& e) {
        errors.push_back(std::string("conditions: ") + e.what());
      }
    }
  }
  if (j.contains("formats")) {
    for (const auto& f : j.at("formats")) {
      try {
        config.formats.push_back(presentation_format_from_string(f.get<std::string>()));
      } catch (const std::exception& e) {
        errors.push_back(std::string("formats: ") + e.what());
      }
    }
  }
  if (j.contains("orders")) {
    for (const auto& o : j.at("orders")) {
      try {
        config.orders.push_back(presentation_order_from_string(o.get<std::string>()));
      } catch (const std::exception& e) {
        errors.push_back(std::string("orders: ") + e.what());
      }
    }
  }
  if (j.contains("control_conditions")) {
    for (const auto& c : j.at("control_conditions")) {
      try {
        config.control_conditions.push_back(
            control_condition_from_string(c.get<std::string>()));
      } catch (const std::exception& e) {
        errors.push_back(std::string("control_conditions: ") + e.what());
      }
    }
  }

  if (auto v = get_opt<int>(j, "grid_max", errors)) config.grid_max = *v;
  if (auto v = get_opt<double>(j, "contentious_threshold", errors))
    config.contentious_threshold = *v;
  if (auto v = get_opt<std::size_t>(j, "sample", errors)) config.sample = *v;
  if (auto v = get_opt<int>(j, "n_bins", errors)) config.n_bins = *v;
  if (auto v = get_opt<int>(j, "workers", errors)) config.workers = *v;

  // Defaults for the per-experiment axes.
  switch (config.experiment) {
    case ExperimentKind::Dyadic:
      if (config.dyadic_conditions.empty())
        config.dyadic_conditions = default_dyadic_conditions();
      break;
    case ExperimentKind::Grid:
      if (config.formats.empty())
        config.formats = {PresentationFormat::Count, PresentationFormat::Ratio,
                          PresentationFormat::List, PresentationFormat::Disc,
                          PresentationFormat::Reason};
      if (config.orders.empty())
        config.orders = {PresentationOrder::AgreeFirst,
                         PresentationOrder::DisagreeFirst};
      break;
    case ExperimentKind::Control:
      if (config.control_conditions.empty())
        config.control_conditions = {
            ControlCondition::Original,      ControlCondition::CoT,
            ControlCondition::Baseline,      ControlCondition::StrongFactors,
            ControlCondition::WeakFactors,   ControlCondition::StrongPrompt,
            ControlCondition::WeakPrompt};
      break;
  }

  if (config.grid_max < 1) errors.push_back("grid_max must be >= 1");
  if (config.n_bins < 2) errors.push_back("n_bins must be >= 2");
  if (config.workers < 1) errors.push_back("workers must be >= 1");
  if (config.sample && *config.sample < 1) errors.push_back("sample must be >= 1");
  if (!(config.contentious_threshold > 0.0 && config.contentious_threshold <= 1.0))
    errors.push_back("contentious_threshold must be in (0,1]");

  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<std::string> errors;
  RunConfig config = parse_run_config(j, errors);
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return config;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace herdsim
