#pragma once
// Median-absolute-deviation filters for per-university admit scores.
//
// Both filters are one-shot: statistics are computed once on the input and
// every score is tested against them. Policy admits (minority, rural and
// talent admissions below the cutoff) are the main target.

#include <span>
#include <string_view>
#include <vector>

namespace rankcast {

enum class ZeroMadPolicy {
  keep_all,   // keep every score on the degenerate side, report zero_mad
  flag_only,  // keep every score, list those off-center in `flagged`
};

enum class FilterMethod { none, single_mad, double_mad };

std::string_view to_string(FilterMethod method);
FilterMethod parse_filter_method(std::string_view text);

struct MadConfig {
  double consistency = 0.6745;
  double threshold = 2.24;
  ZeroMadPolicy zero_mad_policy = ZeroMadPolicy::keep_all;
};

void validate_mad_config(const MadConfig& cfg);

struct RemovedScore {
  int score = 0;
  double statistic = 0.0;
};

struct FilterReport {
  FilterMethod method = FilterMethod::none;
  std::vector<int> kept;  // ascending
  std::vector<RemovedScore> removed;
  std::vector<int> flagged;  // zero-MAD side under flag_only
  double median = 0.0;
  double left_median = 0.0;   // double test only
  double right_median = 0.0;  // double test only
  double mad = 0.0;           // single test
  double mad_left = 0.0;
  double mad_right = 0.0;
  bool zero_mad = false;
};

// Median of a sorted range; even sizes average the two middle values.
double median_sorted(std::span<const double> sorted);
double median_of(std::vector<double> values);

FilterReport single_mad_filter(std::span<const int> scores, const MadConfig& cfg = {});
FilterReport double_mad_filter(std::span<const int> scores, const MadConfig& cfg = {});

// Dispatch used by aggregation. `none` keeps everything.
FilterReport apply_filter(FilterMethod method, std::span<const int> scores, const MadConfig& cfg = {});

}  // namespace rankcast
