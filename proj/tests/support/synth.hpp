#pragma once
// Synthetic cohorts for oracle tests.
//
// Each cohort's candidate scores follow a discretized normal profile. Tier
// quota N fixes the cutoff line at the score held by rank N. Universities own
// fixed fractions of the quota, so a university's cutoff rank in year y is
// round(q_U * N_y) (plus optional bounded jitter). Truth and base-year
// summaries are read off the exact tables, never through library lookups.

#include <cstdint>
#include <string>
#include <vector>

#include "rankcast/ingest.hpp"

namespace rankcast::synth {

// Candidate counts per score 0..scale (index = score).
std::vector<long long> normal_counts(double mean, double sd, long long population, int scale);

// Shifts a count profile by `shift` points, dropping mass pushed off [0, scale].
std::vector<long long> shift_counts(const std::vector<long long>& counts, int shift);

// 1 + number of candidates strictly above s, for every s in 0..scale.
std::vector<long long> brute_ranks(const std::vector<long long>& counts);

// Lowest score whose rank is <= r.
int brute_score_of(const std::vector<long long>& ranks, long long r);

struct GroupSpec {
  ExamType exam = ExamType::li_ke;
  int tier = 1;
  double mean = 470.0;
  double sd = 70.0;
  long long population = 200000;
  std::vector<long long> quota;  // tier quota per year
  std::vector<int> shift;        // exam difficulty shift per year, points
  int universities = 100;
};

struct GeneratorConfig {
  std::string par = "synth";
  std::vector<int> years = {2013, 2014, 2015};
  std::vector<GroupSpec> groups;
  double rank_jitter = 0.0;  // |relative change| of a cutoff rank per year, at most this
  // Quota added after the first year goes to universities in proportion to
  // q^growth_power of their cumulative share q, so larger powers push new
  // seats toward the bottom of the tier.
  double growth_power = 1.0;
  std::uint64_t seed = 7;
  int scale = 750;
};

struct SyntheticCohort {
  CohortContext context;
  std::vector<long long> counts;
  std::vector<long long> ranks;           // indexed by score, 0..scale
  std::vector<UniversitySummary> truths;  // admission/highest read off `ranks`
};

struct SyntheticData {
  std::vector<SyntheticCohort> cohorts;
  DatasetSnapshot snapshot;
};

SyntheticData generate(const GeneratorConfig& config);

// Four groups (LK1, WK1, LK2, WK2) with identical profiles shifted per year.
// Zero jitter makes BRM exact.
GeneratorConfig stable_config(int universities = 60);

// Tier quotas grow each year so the cutoff line falls by at least 15 points.
GeneratorConfig quota_growth_config(double jitter, double growth_power);

}  // namespace rankcast::synth
