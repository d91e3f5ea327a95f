#include "rankcast/outliers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rankcast/domain.hpp"

namespace rankcast {

std::string_view to_string(FilterMethod method) {
  switch (method) {
    case FilterMethod::none: return "none";
    case FilterMethod::single_mad: return "single-mad";
    case FilterMethod::double_mad: return "double-mad";
  }
  return "?";
}

FilterMethod parse_filter_method(std::string_view text) {
  const std::string id = normalize_id(text);
  if (id == "none") return FilterMethod::none;
  if (id == "single-mad" || id == "single") return FilterMethod::single_mad;
  if (id == "double-mad" || id == "double") return FilterMethod::double_mad;
  throw Error(ErrorKind::invalid_argument, "unknown-filter",
              "filter '" + std::string(text) + "' is not none, single-mad or double-mad");
}

void validate_mad_config(const MadConfig& cfg) {
  if (!(cfg.consistency > 0.0))
    throw Error(ErrorKind::invalid_argument, "mad-constant<=0", "consistency constant must be positive");
  if (!(cfg.threshold > 0.0))
    throw Error(ErrorKind::invalid_argument, "mad-threshold<=0", "threshold must be positive");
}

double median_sorted(std::span<const double> sorted) {
  if (sorted.empty()) throw Error(ErrorKind::too_few, "median-empty", "median of an empty list");
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return median_sorted(values);
}

namespace {

std::vector<double> sorted_copy(std::span<const int> scores) {
  std::vector<double> out(scores.begin(), scores.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Tests one score against (center, scale); a zero scale defers to the policy.
void classify(double score, double center, double scale, const MadConfig& cfg, FilterReport& report) {
  const int as_int = static_cast<int>(score);
  if (scale == 0.0) {
    report.zero_mad = true;
    if (cfg.zero_mad_policy == ZeroMadPolicy::flag_only && score != center)
      report.flagged.push_back(as_int);
    report.kept.push_back(as_int);
    return;
  }
  const double statistic = cfg.consistency * std::abs(score - center) / scale;
  if (statistic >= cfg.threshold)
    report.removed.push_back({as_int, statistic});
  else
    report.kept.push_back(as_int);
}

}  // namespace

FilterReport single_mad_filter(std::span<const int> scores, const MadConfig& cfg) {
  validate_mad_config(cfg);
  if (scores.size() < 3)
    throw Error(ErrorKind::too_few, "too-few", "single MAD test needs at least 3 scores");

  FilterReport report;
  report.method = FilterMethod::single_mad;
  const std::vector<double> sorted = sorted_copy(scores);
  report.median = median_sorted(sorted);

  std::vector<double> deviations;
  deviations.reserve(sorted.size());
  for (double s : sorted) deviations.push_back(std::abs(s - report.median));
  report.mad = median_of(deviations);

  for (double s : sorted) classify(s, report.median, report.mad, cfg, report);
  return report;
}

FilterReport double_mad_filter(std::span<const int> scores, const MadConfig& cfg) {
  validate_mad_config(cfg);
  if (scores.size() < 5)
    throw Error(ErrorKind::too_few, "too-few", "double MAD test needs at least 5 scores");

  FilterReport report;
  report.method = FilterMethod::double_mad;
  const std::vector<double> sorted = sorted_copy(scores);
  const std::size_t half = sorted.size() / 2;
  const std::span<const double> low(sorted.data(), half);
  const std::span<const double> high(sorted.data() + half, sorted.size() - half);

  report.median = median_sorted(sorted);
  report.left_median = median_sorted(low);
  report.right_median = median_sorted(high);

  // Deviations are taken from the overall median on both halves.
  std::vector<double> dev_low, dev_high;
  for (double s : low) dev_low.push_back(std::abs(s - report.median));
  for (double s : high) dev_high.push_back(std::abs(s - report.median));
  report.mad_left = median_of(dev_low);
  report.mad_right = median_of(dev_high);

  for (double s : sorted) {
    if (s <= report.median)
      classify(s, report.left_median, report.mad_left, cfg, report);
    else
      classify(s, report.right_median, report.mad_right, cfg, report);
  }
  return report;
}

FilterReport apply_filter(FilterMethod method, std::span<const int> scores, const MadConfig& cfg) {
  switch (method) {
    case FilterMethod::single_mad: return single_mad_filter(scores, cfg);
    case FilterMethod::double_mad: return double_mad_filter(scores, cfg);
    case FilterMethod::none: break;
  }
  FilterReport report;
  report.kept.assign(scores.begin(), scores.end());
  std::sort(report.kept.begin(), report.kept.end());
  if (!report.kept.empty()) report.median = median_of({report.kept.begin(), report.kept.end()});
  return report;
}

}  // namespace rankcast
