#pragma once

#include <string>
#include <vector>

#include "herdsim/metrics.hpp"
#include "herdsim/records.hpp"

namespace herdsim {

enum class ReportKind { FlipTable, Heatmap, GridHeatmap, ControlTable };

std::string to_string(ReportKind k);
ReportKind report_kind_from_string(const std::string& s);

/// Diverging blue-to-red scale (#3b4cc0 .. #b40426), t in [0,1].
std::string heat_color(double t);

/// Table-2-shaped CSV: one row per condition, one column per benchmark plus
/// the row average; the best rate in each condition group gets a '*' when the
/// paired t-test against the runner-up has p < 0.05.
std::string flip_table_csv(const std::vector<TrialRecord>& records);

/// Table-3-shaped CSV: benchmark,condition,flip_rate,entropy,consensus_rate,
/// accuracy ('-' where undefined), with '*' on significant column bests.
std::string control_table_csv(const std::vector<GroupOutcome>& outcomes);

/// Self-confidence x perceived-confidence flip-rate surface.
std::string heatmap_svg(const HeatmapGrid& grid);

/// n_agree x n_disagree flip-rate surface for one format/order; the (0,0)
/// cell renders blank.
std::string grid_heatmap_svg(const std::vector<TrialRecord>& records,
                             PresentationFormat format, PresentationOrder order,
                             int grid_max);

/// Writes the requested report files under out_dir; throws on a records/kind
/// mismatch. Returns the written file names.
std::vector<std::string> write_report(const std::string& records_path,
                                      ReportKind kind, const std::string& out_dir,
                                      int n_bins = 10);

/// Atomic file write (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace herdsim
