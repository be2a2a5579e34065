#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "herdsim/config.hpp"
#include "herdsim/error.hpp"
#include "herdsim/metrics.hpp"
#include "herdsim/report.hpp"
#include "herdsim/runner.hpp"
#include "test_util.hpp"

using namespace herdsim;
using namespace herdsim::test;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("herdsim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count_occurrences(const std::string& haystack, const std::string& needle) {
  int count = 0;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

json synthetic_config(const std::string& experiment, const fs::path& out_dir,
                      std::uint64_t seed = 42) {
  json cfg;
  cfg["experiment"] = experiment;
  cfg["benchmarks"] = {std::string(HERDSIM_DATA_DIR) + "/factual20.jsonl"};
  cfg["seed"] = seed;
  cfg["output_dir"] = out_dir.string();
  cfg["agent"] = {{"backend", "synthetic"}};
  return cfg;
}

RunConfig parse_ok(const json& j) {
  std::vector<std::string> errors;
  const RunConfig config = parse_run_config(j, errors);
  REQUIRE_MESSAGE(errors.empty(), "unexpected config errors");
  return config;
}

}  // namespace

TEST_CASE("heat color interpolates the documented endpoints") {
  CHECK(heat_color(0.0) == "#3b4cc0");
  CHECK(heat_color(1.0) == "#b40426");
  CHECK(heat_color(-1.0) == "#3b4cc0");
  CHECK(heat_color(2.0) == "#b40426");
}

TEST_CASE("run writes manifest, records and summary") {
  const auto dir = fresh_dir("run_dyadic");
  const json cfg = synthetic_config("dyadic", dir);
  const RunConfig config = parse_ok(cfg);
  const RunArtifacts artifacts = run_experiment(config, cfg.dump());

  CHECK(fs::exists(artifacts.records_path));
  CHECK(fs::exists(artifacts.summary_path));
  CHECK(fs::exists(artifacts.manifest_path));

  const json manifest = json::parse(slurp(artifacts.manifest_path));
  CHECK(manifest.at("experiment") == "dyadic");
  CHECK(manifest.at("config_hash") == fnv1a_hex(cfg.dump()));
  CHECK(manifest.at("seed") == 42);
  CHECK(manifest.at("model_id") == "synthetic");
  CHECK(manifest.at("errors") == 0);

  const std::string summary = slurp(artifacts.summary_path);
  CHECK(summary.rfind("condition,", 0) == 0);
  CHECK(summary.find("2nd") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("reruns with the same config are byte-identical") {
  const auto dir1 = fresh_dir("det1");
  const auto dir2 = fresh_dir("det2");
  json cfg1 = synthetic_config("dyadic", dir1, 202);
  json cfg2 = synthetic_config("dyadic", dir2, 202);
  cfg2["output_dir"] = dir2.string();

  const auto a1 = run_experiment(parse_ok(cfg1), cfg1.dump());
  const auto a2 = run_experiment(parse_ok(cfg2), cfg2.dump());
  CHECK(slurp(a1.records_path) == slurp(a2.records_path));
  CHECK(slurp(a1.summary_path) == slurp(a2.summary_path));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("flip table has the Table 2 shape") {
  const auto dir = fresh_dir("fliptable");
  const json cfg = synthetic_config("dyadic", dir);
  const auto artifacts = run_experiment(parse_ok(cfg), cfg.dump());

  const auto written =
      write_report(artifacts.records_path, ReportKind::FlipTable, dir.string());
  REQUIRE(written.size() == 1);
  const std::string csv = slurp(written[0]);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "condition,factual20,average");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 11);
  const std::string first_data = csv.substr(csv.find('\n') + 1, 4);
  CHECK(first_data == "1st,");
  fs::remove_all(dir);
}

TEST_CASE("grid heatmaps render 35 colored cells and one blank") {
  const auto dir = fresh_dir("gridmap");
  json cfg = synthetic_config("grid", dir);
  cfg["formats"] = {"count"};
  cfg["orders"] = {"agree_first"};
  cfg["sample"] = 5;
  const auto artifacts = run_experiment(parse_ok(cfg), cfg.dump());

  const auto written =
      write_report(artifacts.records_path, ReportKind::GridHeatmap, dir.string());
  REQUIRE(written.size() == 1);
  CHECK(written[0].find("grid_count_agree_first.svg") != std::string::npos);
  const std::string svg = slurp(written[0]);
  CHECK(count_occurrences(svg, "class=\"cell\"") == 35);
  CHECK(count_occurrences(svg, "class=\"blank\"") == 1);
  CHECK(count_occurrences(svg, "class=\"legend\"") > 0);
  fs::remove_all(dir);
}

TEST_CASE("heatmap svg colors a single-record dataset") {
  std::vector<TrialRecord> records;
  TrialRecord r;
  r.question_id = "q";
  r.benchmark = "b";
  r.condition = TrialCondition::peer_condition(PeerCondition::Second);
  r.flip = 1;
  r.self_confidence = 0.3;
  r.perceived_confidence = 0.25;
  records.push_back(r);

  const std::string svg = heatmap_svg(bin_heatmap(records, 10));
  CHECK(count_occurrences(svg, "class=\"cell\"") == 1);  // the single colored cell
  CHECK(count_occurrences(svg, "class=\"cell empty\"") == 99);
  CHECK(count_occurrences(svg, heat_color(1.0)) >= 1);
  CHECK(count_occurrences(svg, "class=\"legend\"") == 32);
  CHECK(svg.find("self-confidence") != std::string::npos);
  CHECK(svg.find("perceived confidence") != std::string::npos);
}

TEST_CASE("control table shows '-' for Original flips") {
  const auto dir = fresh_dir("controltab");
  json cfg = synthetic_config("control", dir);
  cfg["control_conditions"] = {"original", "baseline", "strong_factors",
                               "weak_factors"};
  cfg["contentious_threshold"] = 0.9;
  const auto artifacts = run_experiment(parse_ok(cfg), cfg.dump());

  const auto written =
      write_report(artifacts.records_path, ReportKind::ControlTable, dir.string());
  REQUIRE(written.size() == 1);
  const std::string csv = slurp(written[0]);
  CHECK(csv.rfind("benchmark,condition,flip_rate,entropy,consensus_rate,accuracy\n",
                  0) == 0);
  CHECK(csv.find("factual20,original,-,") != std::string::npos);
  CHECK(csv.find("factual20,baseline,0.") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("report kinds reject mismatched records") {
  const auto dir = fresh_dir("mismatch");
  json cfg = synthetic_config("control", dir);
  cfg["control_conditions"] = {"baseline"};
  const auto artifacts = run_experiment(parse_ok(cfg), cfg.dump());
  CHECK_THROWS_AS(
      write_report(artifacts.records_path, ReportKind::FlipTable, dir.string()),
      MetricError);
  CHECK_THROWS_AS(
      write_report(artifacts.records_path, ReportKind::Heatmap, dir.string()),
      MetricError);

  const auto dir2 = fresh_dir("mismatch2");
  const json dyadic_cfg = synthetic_config("dyadic", dir2);
  const auto dyadic = run_experiment(parse_ok(dyadic_cfg), dyadic_cfg.dump());
  CHECK_THROWS_AS(
      write_report(dyadic.records_path, ReportKind::ControlTable, dir2.string()),
      MetricError);
  CHECK_THROWS_AS(
      write_report(dyadic.records_path, ReportKind::GridHeatmap, dir2.string()),
      MetricError);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("reports are pure functions of the record bytes") {
  const auto dir = fresh_dir("purereport");
  json cfg = synthetic_config("grid", dir);
  cfg["formats"] = {"ratio"};
  cfg["sample"] = 4;
  const auto artifacts = run_experiment(parse_ok(cfg), cfg.dump());

  const auto out1 = fresh_dir("purereport_out1");
  const auto out2 = fresh_dir("purereport_out2");
  write_report(artifacts.records_path, ReportKind::GridHeatmap, out1.string());
  write_report(artifacts.records_path, ReportKind::GridHeatmap, out2.string());
  for (const auto& entry : fs::directory_iterator(out1)) {
    const auto name = entry.path().filename();
    CHECK(slurp(entry.path()) == slurp(out2 / name));
  }
  fs::remove_all(dir);
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("records round-trip through jsonl") {
  const auto dir = fresh_dir("roundtrip");
  const json cfg = synthetic_config("dyadic", dir);
  const auto artifacts = run_experiment(parse_ok(cfg), cfg.dump());
  const RecordFile file = load_records(artifacts.records_path);
  CHECK(!file.is_control());
  CHECK(file.trials.size() == artifacts.record_count);

  std::ostringstream rewritten;
  write_trial_records(rewritten, file.trials);
  CHECK(rewritten.str() == slurp(artifacts.records_path));
  fs::remove_all(dir);
}

TEST_CASE("cli run/validate/report smoke test") {
  const auto dir = fresh_dir("cli");
  json cfg = synthetic_config("dyadic", dir / "out");
  const fs::path cfg_path = dir / "dyadic.json";
  {
    std::ofstream out(cfg_path);
    out << cfg.dump(2);
  }
  const std::string cli = HERDSIM_CLI_PATH;

  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > " + (dir / "stdout.txt").string() +
                            " 2> " + (dir / "stderr.txt").string();
    return std::system(cmd.c_str());
  };

  CHECK(run("validate --config " + cfg_path.string()) == 0);
  CHECK(run("run --config " + cfg_path.string()) == 0);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(fs::exists(dir / "out" / "records.jsonl"));
  CHECK(fs::exists(dir / "out" / "summary.csv"));
  CHECK(run("report --records " + (dir / "out" / "records.jsonl").string() +
            " --kind heatmap --out " + (dir / "report").string()) == 0);
  CHECK(fs::exists(dir / "report" / "heatmap.svg"));

  // Repeated --benchmark flags override the config's benchmark list.
  fs::remove_all(dir / "out");
  CHECK(run("run --config " + cfg_path.string() + " --benchmark " +
            std::string(HERDSIM_DATA_DIR) + "/factual20.jsonl --benchmark " +
            std::string(HERDSIM_DATA_DIR) + "/opinion20.jsonl") == 0);
  const std::string overridden = slurp(dir / "out" / "summary.csv");
  CHECK(overridden.find("opinion20") != std::string::npos);

  // Invalid config: nonzero exit and a diagnostic naming the field.
  json bad = cfg;
  bad["agent"]["alpha"] = -2.0;
  const fs::path bad_path = dir / "bad.json";
  {
    std::ofstream out(bad_path);
    out << bad.dump(2);
  }
  CHECK(run("validate --config " + bad_path.string()) != 0);
  CHECK(slurp(dir / "stderr.txt").find("alpha") != std::string::npos);
  fs::remove_all(dir);
}
