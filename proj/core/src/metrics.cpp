#include "herdsim/metrics.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "herdsim/error.hpp"

namespace herdsim {

const HeatmapGrid::Cell& HeatmapGrid::cell(int x, int y) const {
  return cells.at(static_cast<std::size_t>(y) * n_bins + x);
}

HeatmapGrid::Cell& HeatmapGrid::cell(int x, int y) {
  return cells.at(static_cast<std::size_t>(y) * n_bins + x);
}

double HeatmapGrid::rate(int x, int y) const {
  const Cell& c = cell(x, y);
  if (c.count == 0) throw MetricError("heatmap cell is empty");
  return c.flip_sum / static_cast<double>(c.count);
}

long HeatmapGrid::total_count() const {
  long total = 0;
  for (const auto& c : cells) total += c.count;
  return total;
}

int HeatmapGrid::bin_index(double value, int n_bins) {
  if (!(value >= 0.0 && value <= 1.0))
    throw MetricError("heatmap value outside [0,1]");
  const int idx = static_cast<int>(std::floor(value * n_bins));
  return idx >= n_bins ? n_bins - 1 : idx;  // 1.0 falls in the last bin
}

double flip_rate(std::span<const TrialRecord> records) {
  if (records.empty()) throw MetricError("flip_rate of empty record set");
  double sum = 0.0;
  for (const auto& r : records) sum += r.flip;
  return sum / static_cast<double>(records.size());
}

double answer_entropy(const std::vector<char>& final_answers) {
  if (final_answers.empty()) throw MetricError("entropy of empty answer list");
  std::map<char, int> counts;
  for (char a : final_answers) ++counts[a];
  const double n = static_cast<double>(final_answers.size());
  double h = 0.0;
  for (const auto& [label, count] : counts) {
    const double p = count / n;
    h -= p * std::log(p);
  }
  return h;
}

double consensus_rate(std::span<const GroupOutcome> outcomes) {
  if (outcomes.empty()) throw MetricError("consensus_rate of empty outcome set");
  double sum = 0.0;
  for (const auto& o : outcomes) sum += o.consensus;
  return sum / static_cast<double>(outcomes.size());
}

double group_accuracy(std::span<const GroupOutcome> outcomes) {
  if (outcomes.empty()) throw MetricError("group_accuracy of empty outcome set");
  double sum = 0.0;
  for (const auto& o : outcomes) {
    if (!o.accuracy)
      throw MetricError("group_accuracy requires gold labels (outcome " +
                        o.question_id + " has none)");
    sum += *o.accuracy;
  }
  return sum / static_cast<double>(outcomes.size());
}

HeatmapGrid bin_heatmap(std::span<const TrialRecord> records, int n_bins) {
  if (n_bins < 2) throw MetricError("heatmap needs at least 2 bins");
  HeatmapGrid grid;
  grid.n_bins = n_bins;
  grid.cells.assign(static_cast<std::size_t>(n_bins) * n_bins, {});
  for (const auto& r : records) {
    const int x = HeatmapGrid::bin_index(r.self_confidence, n_bins);
    const int y = HeatmapGrid::bin_index(r.perceived_confidence, n_bins);
    auto& c = grid.cell(x, y);
    c.flip_sum += r.flip;
    ++c.count;
  }
  return grid;
}

namespace {

// Lanczos approximation, g = 7.
double log_gamma(double x) {
  static const double coeffs[9] = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection formula.
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  x -= 1.0;
  double a = coeffs[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += coeffs[i] / (x + i);
  return 0.5 * std::log(2.0 * M_PI) + (x + 0.5) * std::log(t) - t + std::log(a);
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw MetricError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw MetricError("beta parameters must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw MetricError("beta argument outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw MetricError("degrees of freedom must be > 0");
  if (std::isinf(t)) return 0.0;
  if (!std::isfinite(t)) throw MetricError("non-finite t statistic");
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

StatResult pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw MetricError("pearson_r inputs differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw MetricError("pearson_r needs at least 3 pairs");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw MetricError("zero variance");

  double r = sxy / std::sqrt(sxx * syy);
  r = std::max(-1.0, std::min(1.0, r));

  StatResult out;
  out.statistic = r;
  out.n = n;
  const double df = static_cast<double>(n - 2);
  const double denom = 1.0 - r * r;
  if (denom <= 0.0) {
    out.p_value = 0.0;
  } else {
    const double t = r * std::sqrt(df / denom);
    out.p_value = student_t_two_sided_p(t, df);
  }
  return out;
}

StatResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw MetricError("paired_t_test inputs differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw MetricError("paired_t_test needs at least 2 pairs");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);

  double ss = 0.0;
  bool all_zero = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) all_zero = false;
    ss += (d - mean) * (d - mean);
  }
  if (all_zero) throw MetricError("degenerate pairing");

  StatResult out;
  out.n = n;
  const double df = static_cast<double>(n - 1);
  const double sd = std::sqrt(ss / df);
  if (sd == 0.0) {
    // Constant nonzero differences: the t statistic diverges; p -> 0.
    out.statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    return out;
  }
  out.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  out.p_value = student_t_two_sided_p(out.statistic, df);
  return out;
}

}  // namespace herdsim
