#include "herdsim/runner.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "herdsim/error.hpp"
#include "herdsim/report.hpp"

namespace herdsim {

using nlohmann::json;

namespace {

std::string iso_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

Benchmark with_questions(const Benchmark& src, std::vector<Question> questions) {
  Benchmark b;
  b.name = src.name;
  b.kind = src.kind;
  b.questions = std::move(questions);
  std::set<std::string> domains;
  for (const auto& q : b.questions)
    if (q.domain) domains.insert(*q.domain);
  b.domains.assign(domains.begin(), domains.end());
  return b;
}

std::string fmt(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

void accumulate(RunStats& total, const RunStats& part) {
  total.questions += part.questions;
  total.errors += part.errors;
  total.skipped += part.skipped;
  total.abstentions += part.abstentions;
}

}  // namespace

std::shared_ptr<const AgentModel> make_agent(const RunConfig& config) {
  if (config.is_synthetic()) {
    const auto& backend = std::get<SyntheticBackend>(config.backend);
    return std::make_shared<SyntheticAgent>(backend.params, config.seed);
  }
  const auto& backend = std::get<GatewayBackend>(config.backend);
  const std::string url = env_or("HERDSIM_GATEWAY_URL", backend.url);
  if (url.empty())
    throw ConfigError(
        "gateway backend needs a URL (config agent.url or HERDSIM_GATEWAY_URL)");
  const std::string api_key = env_or("HERDSIM_API_KEY", "");
  auto client = std::make_shared<GatewayClient>(url, api_key, backend.limits);
  return std::make_shared<GatewayAgent>(client, backend.model_id,
                                        backend.temperature,
                                        backend.reason_cache_dir);
}

std::string format_table_csv(const std::vector<TrialRecord>& records) {
  std::map<std::pair<PresentationFormat, PresentationOrder>,
           std::vector<const TrialRecord*>>
      by_style;
  for (const auto& r : records) {
    if (r.condition.kind != TrialCondition::Kind::Grid)
      throw MetricError("format table requires grid records");
    by_style[{*r.condition.format, *r.condition.order}].push_back(&r);
  }

  std::ostringstream out;
  out << "format,order,flip_rate,rho_agree,rho_disagree,rho_diff,n\n";
  for (const auto& [style, rows] : by_style) {
    std::vector<double> flips, agree, disagree, diff;
    flips.reserve(rows.size());
    for (const auto* r : rows) {
      flips.push_back(r->flip);
      agree.push_back(*r->condition.n_agree);
      disagree.push_back(*r->condition.n_disagree);
      diff.push_back(*r->condition.n_agree - *r->condition.n_disagree);
    }
    double rate = 0.0;
    for (double f : flips) rate += f;
    rate /= static_cast<double>(flips.size());

    auto rho = [&](const std::vector<double>& ys) -> std::string {
      try {
        return fmt(pearson_r(flips, ys).statistic);
      } catch (const MetricError&) {
        return "-";  // constant flips or constant axis
      }
    };
    out << to_string(style.first) << ',' << to_string(style.second) << ','
        << fmt(rate) << ',' << rho(agree) << ',' << rho(disagree) << ','
        << rho(diff) << ',' << flips.size() << '\n';
  }
  return out.str();
}

RunArtifacts run_experiment(const RunConfig& config, const std::string& config_bytes) {
  const std::string started = iso_utc_now();
  const auto agent = make_agent(config);

  std::vector<Benchmark> benchmarks;
  for (const auto& path : config.benchmark_paths) {
    Benchmark b = load_benchmark(path);
    if (config.sample) b = with_questions(b, sample_questions(b, *config.sample, config.seed));
    benchmarks.push_back(std::move(b));
  }

  DriverOptions options;
  options.seed = config.seed;
  options.workers = config.workers;

  RunStats total;
  std::vector<TrialRecord> trials;
  std::vector<GroupOutcome> outcomes;

  switch (config.experiment) {
    case ExperimentKind::Dyadic: {
      for (const auto& b : benchmarks) {
        RunStats stats;
        auto records = run_dyadic(b, *agent, config.dyadic_conditions, options, &stats);
        accumulate(total, stats);
        for (auto& r : records) trials.push_back(std::move(r));
      }
      break;
    }
    case ExperimentKind::Grid: {
      for (const auto& b : benchmarks) {
        RunStats stats;
        auto records = run_group_grid(b, *agent, config.formats, config.orders,
                                      config.grid_max, options, &stats);
        accumulate(total, stats);
        for (auto& r : records) trials.push_back(std::move(r));
      }
      break;
    }
    case ExperimentKind::Control: {
      const std::vector<std::shared_ptr<const AgentModel>> agents(5, agent);
      for (const auto& b : benchmarks) {
        const Benchmark contentious = with_questions(
            b, filter_contentious(b, *agent, config.contentious_threshold));
        for (const auto condition : config.control_conditions) {
          RunStats stats;
          auto result = run_control(contentious, agents, condition, options, &stats);
          accumulate(total, stats);
          for (auto& o : result) outcomes.push_back(std::move(o));
        }
      }
      break;
    }
  }

  // Record stream, sorted for byte-stable reruns.
  std::ostringstream records_stream;
  std::size_t record_count = 0;
  if (config.experiment == ExperimentKind::Control) {
    record_count = outcomes.size();
    write_group_outcomes(records_stream, outcomes);
  } else {
    record_count = trials.size();
    write_trial_records(records_stream, trials);
  }

  std::string summary;
  switch (config.experiment) {
    case ExperimentKind::Dyadic:
      summary = flip_table_csv(trials);
      break;
    case ExperimentKind::Grid:
      summary = format_table_csv(trials);
      break;
    case ExperimentKind::Control:
      summary = control_table_csv(outcomes);
      break;
  }

  json manifest;
  manifest["experiment"] = to_string(config.experiment);
  manifest["config_hash"] = fnv1a_hex(config_bytes);
  manifest["seed"] = config.seed;
  manifest["model_id"] = agent->model_id();
  json names = json::array();
  for (const auto& b : benchmarks) names.push_back(b.name);
  manifest["benchmarks"] = std::move(names);
  manifest["started"] = started;
  manifest["finished"] = iso_utc_now();
  manifest["questions"] = total.questions;
  manifest["errors"] = total.errors;
  manifest["skipped"] = total.skipped;
  manifest["abstentions"] = total.abstentions;
  manifest["records"] = record_count;
  manifest["notes"] = {
      {"sampling", "question caps are applied before any degeneracy filtering; "
                   "the control protocol samples first, then applies the "
                   "contentiousness filter"},
      {"revision", "simultaneous: every agent revises against the initial answers"},
      {"initial_answer_streams",
       "condition-independent substreams (seed, control.initial, question, agent)"},
      {"missing_label_floor",
       "labels absent from gateway top-k get log(1e-3 * smallest returned "
       "label probability)"},
  };

  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  RunArtifacts artifacts;
  artifacts.stats = total;
  artifacts.record_count = record_count;
  artifacts.records_path = (fs::path(config.output_dir) / "records.jsonl").string();
  artifacts.summary_path = (fs::path(config.output_dir) / "summary.csv").string();
  artifacts.manifest_path = (fs::path(config.output_dir) / "manifest.json").string();
  write_file_atomic(artifacts.records_path, records_stream.str());
  write_file_atomic(artifacts.summary_path, summary);
  write_file_atomic(artifacts.manifest_path, manifest.dump(2) + "\n");
  return artifacts;
}

}  // namespace herdsim
