#pragma once
// Point-difference accuracy and the model x PD x group report.
//
// A prediction is correct at tolerance PD when |predicted - truth| <= PD. The
// report lays cells out in PD blocks, one row per model, one column per
// exam/tier group (LK1, WK1, LK2, WK2).

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rankcast/domain.hpp"
#include "rankcast/ingest.hpp"
#include "rankcast/models.hpp"

namespace rankcast {

struct AccuracyCell {
  ModelId model = ModelId::brm;
  int pd = 0;
  std::string group;
  double percentage = 0.0;  // one decimal
  int numerator = 0;
  int denominator = 0;
  int missing_truth = 0;  // predictions without a truth value, excluded

  friend bool operator==(const AccuracyCell&, const AccuracyCell&) = default;
};

// 100 * numerator / denominator rounded to one decimal, halves away from zero.
double round_percentage(int numerator, int denominator);

std::vector<int> default_pds(int scale_max);

AccuracyCell pd_accuracy(std::span<const Prediction> predictions, const std::map<std::string, int>& truths,
                         int pd);

struct ReportRequest {
  std::string par;
  int target_year = 0;
  std::vector<int> base_years;  // empty: target - 1 and target - 2
  std::vector<ModelId> models;  // empty: all
  std::vector<int> pds;         // empty: scale defaults
  bool ensemble = true;
  ModelConfig config;
  int threads = 1;
};

struct AccuracyReport {
  std::vector<ModelId> models;
  std::vector<int> pds;
  std::vector<std::string> groups;
  std::vector<AccuracyCell> cells;  // ordered by pd, model, group
  std::vector<std::string> diagnostics;

  const AccuracyCell* find(ModelId model, int pd, const std::string& group) const;
};

AccuracyReport accuracy_report(const DatasetSnapshot& snapshot, const ReportRequest& request);

std::string format_report_text(const AccuracyReport& report);
// Columns: model,pd,group,percentage,numerator,denominator
std::string format_report_csv(const AccuracyReport& report);

}  // namespace rankcast
