#pragma once
// Interval-based application recommendations.
//
// Each university's predicted [A_low, A_high] range, padded by delta on both
// sides, is cut into J contiguous half-open slots labeled A (most competitive)
// through the J-th letter (safest). A student lands in at most one slot per
// university.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankcast/domain.hpp"
#include "rankcast/ingest.hpp"
#include "rankcast/models.hpp"

namespace rankcast {

struct UniversityIntervalSet {
  std::string university;
  int predicted_low = 0;
  int predicted_high = 0;
  int delta = 5;
  bool equal_width = false;  // fallback used because the range is narrower than J
  std::vector<RecommendationSlot> slots;
};

// "A", "B", ... for the first 26 slots, then "S27", "S28", ...
std::string slot_label(int index);

// Throws when low > high, J < 1, delta < 1, or the padded range has fewer
// than J score points.
UniversityIntervalSet build_slots(int low, int high, int slot_count, int delta);

std::optional<RecommendationSlot> assign_slot(int score, const UniversityIntervalSet& set);

struct Candidate {
  const UniversitySummary* profile = nullptr;
  bool preferred = false;
};

// Hard constraints: exam type, tier, disliked location, all majors disliked.
// Survivors are ordered preferred first, then by admission score descending.
std::vector<Candidate> filter_candidates(const StudentPreference& prefs,
                                         std::span<const UniversitySummary> profiles);

struct RecommendRequest {
  StudentPreference prefs;
  std::string par;
  int target_year = 0;
  std::vector<int> base_years;  // empty: target - 1 and target - 2 when present
  ModelId model = ModelId::wpm;
  int slots = 3;
  int delta = 5;
  std::map<std::string, int> delta_overrides;
  bool ensemble = true;
  ModelConfig config;
};

struct RecommendedUniversity {
  std::string university;
  std::string location;
  int predicted_low = 0;
  int predicted_high = 0;
  RecommendationSlot slot;
  bool preferred = false;
  Flags flags;
};

struct RecommendationList {
  int category_index = 0;
  std::string label;
  std::vector<RecommendedUniversity> universities;
};

struct RecommendResult {
  std::vector<int> base_years;
  std::vector<RecommendationList> lists;  // exactly `slots` lists
  std::vector<std::string> diagnostics;
};

// Base years actually present in the snapshot for the given cohort shape,
// most recent first.
std::vector<int> resolve_base_years(const DatasetSnapshot& snapshot, const ContextKey& target,
                                    const std::vector<int>& requested);

RecommendResult recommend(const RecommendRequest& request, const DatasetSnapshot& snapshot);

}  // namespace rankcast
