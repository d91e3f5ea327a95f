#pragma once
// Score-ranking tables and the rank/score operators over them.
//
// rank(s) = 1 + number of students scoring strictly above s. Tables are dense
// over every integer score in their domain; sparse inputs are densified by
// monotone cubic interpolation, and a missing current-year table can be
// projected from the previous year by shifting and curve fitting.

#include <span>
#include <string_view>
#include <vector>

#include "rankcast/domain.hpp"
#include "rankcast/trig_fit.hpp"

namespace rankcast {

enum class Provenance { exact, interpolated, projected };

std::string_view to_string(Provenance provenance);
Provenance parse_provenance(std::string_view text);

struct SrtEntry {
  int score = 0;
  int rank = 0;

  friend bool operator==(const SrtEntry&, const SrtEntry&) = default;
};

// A lookup result with diagnostic flags for out-of-domain queries.
struct Lookup {
  int value = 0;
  Flags flags;
};

class ScoreRankingTable {
 public:
  // `ranks[i]` is the rank at score `lowest_score + i`; ranks must be >= 1 and
  // nonincreasing as the score grows. `population` is the number of students
  // at or above the lowest score (at least the lowest stored rank minus one).
  static ScoreRankingTable from_dense(CohortContext context, Provenance provenance, int lowest_score,
                                      std::vector<int> ranks, int population);

  const CohortContext& context() const { return context_; }
  Provenance provenance() const { return provenance_; }
  int lowest_score() const { return lowest_; }
  int highest_score() const { return lowest_ + static_cast<int>(ranks_.size()) - 1; }
  int population() const { return population_; }

  // R operator. Above the domain: rank 1, flagged. Below: population + 1, flagged.
  Lookup rank_of(int score) const;
  // S operator: the minimum score whose rank is <= `rank`. Throws for rank < 1;
  // ranks beyond the population return the lowest score, flagged.
  Lookup score_of(int rank) const;
  // Number of students holding exactly `score`: |rank(score - 1) - rank(score)|.
  int count_at(int score) const;

  // Entries by descending score.
  std::vector<SrtEntry> entries() const;

  friend bool operator==(const ScoreRankingTable&, const ScoreRankingTable&) = default;

 private:
  CohortContext context_;
  Provenance provenance_ = Provenance::exact;
  int lowest_ = 0;
  std::vector<int> ranks_;
  int population_ = 0;
};

// Exact table over [min(ascl, ...), highest] from the cohort's raw scores.
// Scores below the cutoff line are not part of the domain.
ScoreRankingTable build_srt(const CohortContext& context, std::span<const int> scores);
ScoreRankingTable build_srt(const CohortContext& context, std::span<const AdmissionRecord> records);

// Running-maximum pass from the highest score downward. Returns the number of
// entries that changed. `ranks` is indexed from the lowest score.
int repair_monotone(std::vector<int>& ranks);

// Shape-preserving piecewise cubic Hermite interpolant (MATLAB pchip slopes).
class Pchip {
 public:
  // x strictly increasing, at least two points.
  Pchip(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  std::span<const double> slopes() const { return slopes_; }

 private:
  std::vector<double> x_, y_, slopes_;
};

// Densifies a sparse table (knots in any order, ranks nondecreasing as the
// score decreases). Output covers [lowest knot, highest knot].
ScoreRankingTable interpolate_sparse(const CohortContext& context, std::span<const SrtEntry> knots);

struct AmendedPoint {
  int score = 0;  // s_i + delta_i
  int rank = 0;
  int shift = 0;  // delta_i
};

struct AmendedTable {
  std::vector<AmendedPoint> points;  // same order as the source entries
  int rh = 0;                        // amended highest score
  int rl = 0;                        // amended lowest score
  int ascl_shift = 0;                // D = L_cur - L_prev
};

// Shifts each previous-year point by the cutoff-line change. Uses previous
// entries with scores inside [L_prev, H_prev].
AmendedTable amend_table(const ScoreRankingTable& previous, int ascl_current, int highest_current);

struct ProjectionConfig {
  int order = 3;
  // Ranks span several orders of magnitude inside one segment; relative
  // residuals keep the sparse top of the table from being traded away.
  TrigFitOptions fit{.weighting = TrigWeighting::relative};
};

struct FittedCurve {
  double split_score = 0.0;  // high segment is [split, RH]
  TrigSeries low;
  TrigSeries high;
  TrigFitStats low_stats;
  TrigFitStats high_stats;
  int repaired_points = 0;  // entries moved by the monotone repair
  Flags flags;

  // Evaluates the concatenated curve, clamping the argument to [rl, rh].
  double operator()(double score) const;
  double rl = 0.0;
  double rh = 0.0;
};

struct Projection {
  AmendedTable amended;
  FittedCurve curve;
  ScoreRankingTable table;
};

// Projects next year's table for `target` (whose ascl/highest give L_cur and
// H_cur) from the previous year's exact or interpolated table.
Projection project_srt(const ScoreRankingTable& previous, const CohortContext& target,
                       const ProjectionConfig& config = {});

}  // namespace rankcast
