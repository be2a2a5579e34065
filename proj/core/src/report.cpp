#include "herdsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "herdsim/error.hpp"

namespace herdsim {

std::string to_string(ReportKind k) {
  switch (k) {
    case ReportKind::FlipTable: return "flip-table";
    case ReportKind::Heatmap: return "heatmap";
    case ReportKind::GridHeatmap: return "grid-heatmap";
    case ReportKind::ControlTable: return "control-table";
  }
  throw ConfigError("unknown report kind");
}

ReportKind report_kind_from_string(const std::string& s) {
  if (s == "flip-table") return ReportKind::FlipTable;
  if (s == "heatmap") return ReportKind::Heatmap;
  if (s == "grid-heatmap") return ReportKind::GridHeatmap;
  if (s == "control-table") return ReportKind::ControlTable;
  throw ConfigError("unknown report kind: " + s);
}

namespace {

std::string fmt(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

constexpr double kSignificance = 0.05;

// Condition rows in Table 2 order.
const std::vector<std::string>& condition_row_order() {
  static const std::vector<std::string> order = {
      "peer:1st",
      "peer:2nd",
      "peer:rnd",
      "peer:last",
      "persona:graduate_degree",
      "persona:college_degree",
      "persona:high_school_diploma",
      "persona:employer",
      "persona:employee",
      "persona:in_domain",
      "persona:out_of_domain",
  };
  return order;
}

// Groups the paired t-tests compare within (peer conditions; education,
// hierarchy and expertise tiers).
const std::vector<std::vector<std::string>>& condition_groups() {
  static const std::vector<std::vector<std::string>> groups = {
      {"peer:1st", "peer:2nd", "peer:rnd", "peer:last"},
      {"persona:graduate_degree", "persona:college_degree",
       "persona:high_school_diploma"},
      {"persona:employer", "persona:employee"},
      {"persona:in_domain", "persona:out_of_domain"},
  };
  return groups;
}

std::string condition_display(const std::string& key) {
  const auto colon = key.find(':');
  return colon == std::string::npos ? key : key.substr(colon + 1);
}

// flip indicators per question for one (condition, benchmark) cell.
using CellFlips = std::map<std::string, double>;

/// p-value of the paired t-test between two cells over their common
/// questions; nullopt when the pairing is degenerate or too small.
std::optional<double> paired_p(const CellFlips& a, const CellFlips& b) {
  std::vector<double> xs, ys;
  for (const auto& [qid, flip] : a) {
    auto it = b.find(qid);
    if (it == b.end()) continue;
    xs.push_back(flip);
    ys.push_back(it->second);
  }
  if (xs.size() < 2) return std::nullopt;
  try {
    return paired_t_test(xs, ys).p_value;
  } catch (const MetricError&) {
    return std::nullopt;  // all-zero differences: no detectable difference
  }
}

}  // namespace

std::string flip_table_csv(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw MetricError("no records to tabulate");
  for (const auto& r : records) {
    if (r.condition.kind == TrialCondition::Kind::Grid)
      throw MetricError("flip-table requires dyadic records, found grid records");
  }

  // condition key -> benchmark -> question -> flip
  std::map<std::string, std::map<std::string, CellFlips>> cells;
  std::set<std::string> benchmarks;
  for (const auto& r : records) {
    cells[r.condition.key()][r.benchmark][r.question_id] = r.flip;
    benchmarks.insert(r.benchmark);
  }

  auto cell_rate = [](const CellFlips& cell) {
    double sum = 0.0;
    for (const auto& [qid, flip] : cell) sum += flip;
    return sum / static_cast<double>(cell.size());
  };

  // Order rows canonically; unknown keys (none expected) go last.
  std::vector<std::string> row_keys;
  for (const auto& key : condition_row_order())
    if (cells.count(key)) row_keys.push_back(key);
  for (const auto& [key, by_bench] : cells)
    if (std::find(row_keys.begin(), row_keys.end(), key) == row_keys.end())
      row_keys.push_back(key);

  // Significance: within each group and benchmark, star the top-rate
  // condition when the paired test against the runner-up is significant.
  std::set<std::pair<std::string, std::string>> starred;  // (condition, benchmark|avg)
  for (const auto& group : condition_groups()) {
    std::vector<std::string> present;
    for (const auto& key : group)
      if (cells.count(key)) present.push_back(key);
    if (present.size() < 2) continue;

    auto star_scope = [&](const std::string& column,
                          const std::function<CellFlips(const std::string&)>& flips_of) {
      std::string best;
      double best_rate = -1.0;
      for (const auto& key : present) {
        const CellFlips flips = flips_of(key);
        if (flips.empty()) continue;
        const double rate = cell_rate(flips);
        if (rate > best_rate) {
          best_rate = rate;
          best = key;
        }
      }
      if (best.empty()) return;
      bool significant = true;
      for (const auto& key : present) {
        if (key == best) continue;
        const CellFlips flips = flips_of(key);
        if (flips.empty()) continue;
        const auto p = paired_p(flips_of(best), flips);
        if (!p || *p >= kSignificance) {
          significant = false;
          break;
        }
      }
      if (significant) starred.insert({best, column});
    };

    for (const auto& bench : benchmarks) {
      star_scope(bench, [&](const std::string& key) -> CellFlips {
        auto it = cells[key].find(bench);
        return it == cells[key].end() ? CellFlips{} : it->second;
      });
    }
    star_scope("average", [&](const std::string& key) -> CellFlips {
      CellFlips pooled;
      for (const auto& [bench, flips] : cells[key])
        for (const auto& [qid, flip] : flips) pooled[bench + "/" + qid] = flip;
      return pooled;
    });
  }

  std::ostringstream out;
  out << "condition";
  for (const auto& bench : benchmarks) out << ',' << bench;
  out << ",average\n";
  for (const auto& key : row_keys) {
    out << condition_display(key);
    double rate_sum = 0.0;
    int rate_count = 0;
    for (const auto& bench : benchmarks) {
      out << ',';
      auto it = cells[key].find(bench);
      if (it == cells[key].end()) {
        out << '-';
        continue;
      }
      const double rate = cell_rate(it->second);
      rate_sum += rate;
      ++rate_count;
      out << fmt(rate);
      if (starred.count({key, bench})) out << '*';
    }
    out << ',';
    if (rate_count == 0) {
      out << '-';
    } else {
      out << fmt(rate_sum / rate_count);
      if (starred.count({key, "average"})) out << '*';
    }
    out << '\n';
  }
  return out.str();
}

namespace {

const std::vector<ControlCondition>& control_row_order() {
  static const std::vector<ControlCondition> order = {
      ControlCondition::Original,      ControlCondition::CoT,
      ControlCondition::Baseline,      ControlCondition::StrongFactors,
      ControlCondition::WeakFactors,   ControlCondition::StrongPrompt,
      ControlCondition::WeakPrompt};
  return order;
}

struct ControlMetrics {
  std::map<std::string, double> flip;       // question -> flips / n_agents
  std::map<std::string, double> entropy;    // question -> entropy
  std::map<std::string, double> consensus;  // question -> 0/1
  std::map<std::string, double> accuracy;   // question -> 0/1 (factual only)
};

double map_mean(const std::map<std::string, double>& m) {
  double sum = 0.0;
  for (const auto& [k, v] : m) sum += v;
  return sum / static_cast<double>(m.size());
}

}  // namespace

std::string control_table_csv(const std::vector<GroupOutcome>& outcomes) {
  if (outcomes.empty()) throw MetricError("no outcomes to tabulate");

  std::map<std::string, std::map<ControlCondition, ControlMetrics>> table;
  for (const auto& o : outcomes) {
    auto& m = table[o.benchmark][o.condition];
    if (o.flips && !o.final_answers.empty())
      m.flip[o.question_id] =
          static_cast<double>(*o.flips) / static_cast<double>(o.final_answers.size());
    m.entropy[o.question_id] = o.entropy;
    m.consensus[o.question_id] = o.consensus;
    if (o.accuracy) m.accuracy[o.question_id] = *o.accuracy;
  }

  // Stars: per benchmark and metric column, best condition (min for entropy,
  // max otherwise) significant against the runner-up.
  std::set<std::tuple<std::string, ControlCondition, std::string>> starred;
  for (const auto& [bench, by_cond] : table) {
    auto star_metric = [&](const std::string& metric_name, bool lower_is_better,
                           const std::function<const std::map<std::string, double>&(
                               const ControlMetrics&)>& values_of) {
      std::vector<ControlCondition> present;
      for (const auto& [cond, metrics] : by_cond)
        if (!values_of(metrics).empty()) present.push_back(cond);
      if (present.size() < 2) return;
      ControlCondition best = present.front();
      double best_value = map_mean(values_of(by_cond.at(best)));
      for (const auto cond : present) {
        const double v = map_mean(values_of(by_cond.at(cond)));
        if (lower_is_better ? v < best_value : v > best_value) {
          best_value = v;
          best = cond;
        }
      }
      bool significant = true;
      for (const auto cond : present) {
        if (cond == best) continue;
        const auto p = paired_p(values_of(by_cond.at(best)), values_of(by_cond.at(cond)));
        if (!p || *p >= kSignificance) {
          significant = false;
          break;
        }
      }
      if (significant) starred.insert({bench, best, metric_name});
    };
    star_metric("flip_rate", false,
                [](const ControlMetrics& m) -> const std::map<std::string, double>& {
                  return m.flip;
                });
    star_metric("entropy", true,
                [](const ControlMetrics& m) -> const std::map<std::string, double>& {
                  return m.entropy;
                });
    star_metric("consensus_rate", false,
                [](const ControlMetrics& m) -> const std::map<std::string, double>& {
                  return m.consensus;
                });
    star_metric("accuracy", false,
                [](const ControlMetrics& m) -> const std::map<std::string, double>& {
                  return m.accuracy;
                });
  }

  std::ostringstream out;
  out << "benchmark,condition,flip_rate,entropy,consensus_rate,accuracy\n";
  for (const auto& [bench, by_cond] : table) {
    for (const auto cond : control_row_order()) {
      auto it = by_cond.find(cond);
      if (it == by_cond.end()) continue;
      const ControlMetrics& m = it->second;
      out << bench << ',' << to_string(cond) << ',';
      if (m.flip.empty()) {
        out << '-';  // Original/CoT have no revision round
      } else {
        out << fmt(map_mean(m.flip));
        if (starred.count({bench, cond, "flip_rate"})) out << '*';
      }
      out << ',' << fmt(map_mean(m.entropy));
      if (starred.count({bench, cond, "entropy"})) out << '*';
      out << ',' << fmt(map_mean(m.consensus));
      if (starred.count({bench, cond, "consensus_rate"})) out << '*';
      out << ',';
      if (m.accuracy.empty()) {
        out << '-';
      } else {
        out << fmt(map_mean(m.accuracy));
        if (starred.count({bench, cond, "accuracy"})) out << '*';
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string heat_color(double t) {
  t = std::max(0.0, std::min(1.0, t));
  constexpr int lo[3] = {0x3b, 0x4c, 0xc0};
  constexpr int hi[3] = {0xb4, 0x04, 0x26};
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(lo[0] + t * (hi[0] - lo[0]))),
                static_cast<int>(std::lround(lo[1] + t * (hi[1] - lo[1]))),
                static_cast<int>(std::lround(lo[2] + t * (hi[2] - lo[2]))));
  return buf;
}

namespace {

constexpr int kCell = 40;
constexpr int kMarginLeft = 70;
constexpr int kMarginBottom = 50;
constexpr int kMarginTop = 20;
constexpr int kLegendWidth = 70;

void svg_open(std::ostringstream& out, int width, int height) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
}

// Vertical legend bar spanning [0,1], low at the bottom.
void svg_legend(std::ostringstream& out, int x, int y, int height) {
  constexpr int steps = 32;
  const double step_h = static_cast<double>(height) / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = 1.0 - (i + 0.5) / steps;
    out << "  <rect class=\"legend\" x=\"" << x << "\" y=\""
        << fmt(y + i * step_h, 2) << "\" width=\"14\" height=\"" << fmt(step_h + 0.5, 2)
        << "\" fill=\"" << heat_color(t) << "\"/>\n";
  }
  out << "  <text x=\"" << x + 18 << "\" y=\"" << y + 10 << "\">1.0</text>\n";
  out << "  <text x=\"" << x + 18 << "\" y=\"" << y + height << "\">0.0</text>\n";
}

}  // namespace

std::string heatmap_svg(const HeatmapGrid& grid) {
  const int n = grid.n_bins;
  const int width = kMarginLeft + n * kCell + kLegendWidth;
  const int height = kMarginTop + n * kCell + kMarginBottom;

  std::ostringstream out;
  svg_open(out, width, height);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const int px = kMarginLeft + x * kCell;
      const int py = kMarginTop + (n - 1 - y) * kCell;
      if (grid.empty(x, y)) {
        out << "  <rect class=\"cell empty\" x=\"" << px << "\" y=\"" << py
            << "\" width=\"" << kCell << "\" height=\"" << kCell
            << "\" fill=\"#dddddd\"/>\n";
      } else {
        out << "  <rect class=\"cell\" x=\"" << px << "\" y=\"" << py
            << "\" width=\"" << kCell << "\" height=\"" << kCell << "\" fill=\""
            << heat_color(grid.rate(x, y)) << "\"/>\n";
      }
    }
  }
  // Axis ticks at 0 and 1.
  const int bottom = kMarginTop + n * kCell;
  out << "  <text x=\"" << kMarginLeft << "\" y=\"" << bottom + 14 << "\">0</text>\n";
  out << "  <text x=\"" << kMarginLeft + n * kCell - 6 << "\" y=\"" << bottom + 14
      << "\">1</text>\n";
  out << "  <text x=\"" << kMarginLeft + (n * kCell) / 2 - 40 << "\" y=\""
      << bottom + 32 << "\">self-confidence</text>\n";
  out << "  <text x=\"12\" y=\"" << kMarginTop + (n * kCell) / 2
      << "\" transform=\"rotate(-90 12 " << kMarginTop + (n * kCell) / 2
      << ")\" text-anchor=\"middle\">perceived confidence</text>\n";
  svg_legend(out, kMarginLeft + n * kCell + 14, kMarginTop, n * kCell);
  out << "</svg>\n";
  return out.str();
}

std::string grid_heatmap_svg(const std::vector<TrialRecord>& records,
                             PresentationFormat format, PresentationOrder order,
                             int grid_max) {
  const int n = grid_max + 1;
  std::vector<double> sums(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<long> counts(static_cast<std::size_t>(n) * n, 0);
  for (const auto& r : records) {
    if (r.condition.kind != TrialCondition::Kind::Grid) continue;
    if (*r.condition.format != format || *r.condition.order != order) continue;
    const int a = *r.condition.n_agree;
    const int d = *r.condition.n_disagree;
    if (a > grid_max || d > grid_max) continue;
    sums[static_cast<std::size_t>(d) * n + a] += r.flip;
    ++counts[static_cast<std::size_t>(d) * n + a];
  }

  const int width = kMarginLeft + n * kCell + kLegendWidth;
  const int height = kMarginTop + n * kCell + kMarginBottom;
  std::ostringstream out;
  svg_open(out, width, height);
  out << "  <text x=\"" << kMarginLeft << "\" y=\"" << kMarginTop - 6 << "\">"
      << to_string(format) << " / " << to_string(order) << "</text>\n";
  for (int d = 0; d < n; ++d) {
    for (int a = 0; a < n; ++a) {
      const int px = kMarginLeft + a * kCell;
      const int py = kMarginTop + (n - 1 - d) * kCell;
      if (a == 0 && d == 0) {
        out << "  <rect class=\"blank\" x=\"" << px << "\" y=\"" << py
            << "\" width=\"" << kCell << "\" height=\"" << kCell
            << "\" fill=\"#ffffff\" stroke=\"#cccccc\"/>\n";
        continue;
      }
      const long count = counts[static_cast<std::size_t>(d) * n + a];
      if (count == 0) {
        out << "  <rect class=\"cell empty\" x=\"" << px << "\" y=\"" << py
            << "\" width=\"" << kCell << "\" height=\"" << kCell
            << "\" fill=\"#dddddd\"/>\n";
      } else {
        const double rate = sums[static_cast<std::size_t>(d) * n + a] / count;
        out << "  <rect class=\"cell\" x=\"" << px << "\" y=\"" << py
            << "\" width=\"" << kCell << "\" height=\"" << kCell << "\" fill=\""
            << heat_color(rate) << "\"/>\n";
      }
    }
  }
  const int bottom = kMarginTop + n * kCell;
  for (int a = 0; a < n; ++a)
    out << "  <text x=\"" << kMarginLeft + a * kCell + kCell / 2 - 3 << "\" y=\""
        << bottom + 14 << "\">" << a << "</text>\n";
  for (int d = 0; d < n; ++d)
    out << "  <text x=\"" << kMarginLeft - 14 << "\" y=\""
        << kMarginTop + (n - 1 - d) * kCell + kCell / 2 + 4 << "\">" << d
        << "</text>\n";
  out << "  <text x=\"" << kMarginLeft + (n * kCell) / 2 - 40 << "\" y=\""
      << bottom + 32 << "\">agreeing agents</text>\n";
  out << "  <text x=\"12\" y=\"" << kMarginTop + (n * kCell) / 2
      << "\" transform=\"rotate(-90 12 " << kMarginTop + (n * kCell) / 2
      << ")\" text-anchor=\"middle\">disagreeing agents</text>\n";
  svg_legend(out, kMarginLeft + n * kCell + 14, kMarginTop, n * kCell);
  out << "</svg>\n";
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + tmp.string());
    out << contents;
  }
  fs::rename(tmp, target);
}

std::vector<std::string> write_report(const std::string& records_path,
                                      ReportKind kind, const std::string& out_dir,
                                      int n_bins) {
  const RecordFile file = load_records(records_path);
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& contents) {
    const std::string path = (fs::path(out_dir) / name).string();
    write_file_atomic(path, contents);
    written.push_back(path);
  };

  switch (kind) {
    case ReportKind::FlipTable: {
      if (file.trials.empty())
        throw MetricError("flip-table requires trial records");
      emit("flip_table.csv", flip_table_csv(file.trials));
      break;
    }
    case ReportKind::Heatmap: {
      if (file.trials.empty()) throw MetricError("heatmap requires trial records");
      emit("heatmap.svg", heatmap_svg(bin_heatmap(file.trials, n_bins)));
      break;
    }
    case ReportKind::GridHeatmap: {
      std::set<std::pair<PresentationFormat, PresentationOrder>> styles;
      int grid_max = 0;
      for (const auto& r : file.trials) {
        if (r.condition.kind != TrialCondition::Kind::Grid) continue;
        styles.insert({*r.condition.format, *r.condition.order});
        grid_max = std::max({grid_max, *r.condition.n_agree, *r.condition.n_disagree});
      }
      if (styles.empty())
        throw MetricError("grid-heatmap requires grid trial records");
      for (const auto& [format, order] : styles) {
        emit("grid_" + to_string(format) + "_" + to_string(order) + ".svg",
             grid_heatmap_svg(file.trials, format, order, grid_max));
      }
      break;
    }
    case ReportKind::ControlTable: {
      if (file.outcomes.empty())
        throw MetricError("control-table requires group outcome records");
      emit("control_table.csv", control_table_csv(file.outcomes));
      break;
    }
  }
  return written;
}

}  // namespace herdsim
