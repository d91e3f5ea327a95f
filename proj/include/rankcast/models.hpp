#pragma once
// Admission-score predictors.
//
// Ranking models assume a university admits students of a stable rank, so a
// base-year admission score maps to the target year through the two tables:
// predicted = S_target(R_base(A_base)). WSM and WPM add an integer bias on
// top of that, signed by the direction of the cutoff-line change. AASM and
// AADM are the score-averaging baselines.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankcast/domain.hpp"
#include "rankcast/srt.hpp"

namespace rankcast {

struct ModelConfig {
  int clamp_guard = 10;  // predictions stay within [ascl - guard, highest]
  int threads = 1;
};

enum class ScoreField { admission, highest };

// One cohort as seen by the predictors.
struct CohortView {
  const CohortContext* context = nullptr;
  const ScoreRankingTable* table = nullptr;
  std::span<const UniversitySummary> universities;
};

int field_of(const UniversitySummary& u, ScoreField field);

// Clamps into [ascl - guard, highest] and flags when clamping fires.
void clamp_prediction(Prediction& p, const CohortContext& target, int guard);

// S_target(R_base(score)) with lookup flags from both tables.
Lookup brm_score(int base_score, const ScoreRankingTable& base, const ScoreRankingTable& target);
Prediction predict_brm(const std::string& university, int base_score, const ScoreRankingTable& base,
                       const ScoreRankingTable& target, const ModelConfig& config = {});

// Rank-position interval, inclusive; empty when last < first.
struct PositionInterval {
  int first = 1;
  int last = 0;

  int size() const { return last - first + 1; }
  bool contains(int p) const { return p >= first && p <= last; }
};

struct WsmPlan {
  int gap = 0;  // W = |L_target - L_base|
  int slices = 0;  // d
  std::vector<int> sizes;
  std::vector<PositionInterval> intervals;
  int sign = 1;

  // Bias index j of the interval holding 1-based position p (0 when d = 0).
  int bias_index(int position) const;
};

WsmPlan wsm_plan(int universities, int ascl_target, int ascl_base);

// Orders universities by descending field value; ties by larger enrollment,
// then by id.
std::vector<const UniversitySummary*> wsm_order(std::span<const UniversitySummary> universities, ScoreField field);

std::vector<Prediction> predict_wsm(const CohortView& base, const CohortContext& target_context,
                                    const ScoreRankingTable& target_table, ScoreField field = ScoreField::admission,
                                    const ModelConfig& config = {});

// Delta = ceil(N_base / (H_base - L_base)).
int wpm_average_density(const CohortContext& base);
// j = 0 when count < delta, else the j with j*delta <= count < (j+1)*delta.
int wpm_bias_index(int count, int delta);

Prediction predict_wpm(const UniversitySummary& university, const CohortView& base,
                       const CohortContext& target_context, const ScoreRankingTable& target_table,
                       ScoreField field = ScoreField::admission, const ModelConfig& config = {});

int aasm_score(std::optional<int> prev1, std::optional<int> prev2);
int aadm_score(std::optional<int> prev1, std::optional<int> prev2, std::optional<int> ascl_target,
               std::optional<int> ascl_prev1, std::optional<int> ascl_prev2);

// Mean of per-base-year predictions for one university and model.
Prediction ensemble_mean(std::span<const Prediction> predictions);

struct PredictRequest {
  ModelId model = ModelId::brm;
  CohortView target;              // universities unused
  std::vector<CohortView> bases;  // most recent first, one or two
  ScoreField field = ScoreField::admission;
  bool ensemble = true;  // average over both base years when two are given
  ModelConfig config;
};

// Predictions for every university of the base years, sorted by id.
std::vector<Prediction> predict(const PredictRequest& request);

}  // namespace rankcast
