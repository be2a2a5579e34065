#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "herdsim/records.hpp"

namespace herdsim {

// Figure-style flip-rate surface over (self-confidence, perceived
// confidence), equal-width bins over [0,1], right-open except the last.
struct HeatmapGrid {
  int n_bins = 10;
  struct Cell {
    double flip_sum = 0.0;
    long count = 0;
  };
  std::vector<Cell> cells;  // row-major: y * n_bins + x

  const Cell& cell(int x, int y) const;
  Cell& cell(int x, int y);
  bool empty(int x, int y) const { return cell(x, y).count == 0; }
  double rate(int x, int y) const;  // throws MetricError on empty cells
  long total_count() const;

  static int bin_index(double value, int n_bins);
};

struct StatResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Definition 3: mean flip indicator over all (question, agent) trials.
double flip_rate(std::span<const TrialRecord> records);

/// Shannon entropy (natural log) of the empirical answer distribution.
double answer_entropy(const std::vector<char>& final_answers);

/// Fraction of outcomes whose final answers are unanimous.
double consensus_rate(std::span<const GroupOutcome> outcomes);

/// Fraction of outcomes that are unanimous on the gold label; requires every
/// outcome to carry an accuracy flag.
double group_accuracy(std::span<const GroupOutcome> outcomes);

HeatmapGrid bin_heatmap(std::span<const TrialRecord> records, int n_bins);

/// Sample Pearson correlation with a two-sided p-value via the exact
/// t-transform (df = n-2). Errors on constant input.
StatResult pearson_r(std::span<const double> x, std::span<const double> y);

/// Paired two-sided Student t-test (df = n-1). Errors when all differences
/// are zero; zero-variance nonzero-mean differences yield p = 0.
StatResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Exposed numeric internals (checked against published quantiles in tests).
double regularized_incomplete_beta(double a, double b, double x);
double student_t_two_sided_p(double t, double df);

}  // namespace herdsim
