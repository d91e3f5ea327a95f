#include "rankcast/recommend.hpp"

#include <algorithm>

namespace rankcast {

std::string slot_label(int index) {
  if (index >= 0 && index < 26) return std::string(1, static_cast<char>('A' + index));
  return "S" + std::to_string(index + 1);
}

UniversityIntervalSet build_slots(int low, int high, int slot_count, int delta) {
  if (low > high)
    throw Error(ErrorKind::ordering, "low>high", "predicted low " + std::to_string(low) + " exceeds high " + std::to_string(high));
  if (slot_count < 1) throw Error(ErrorKind::invalid_argument, "slots<1", "at least one slot is required");
  if (delta < 1) throw Error(ErrorKind::invalid_argument, "delta<1", "padding must be a positive integer");

  UniversityIntervalSet set;
  set.predicted_low = low;
  set.predicted_high = high;
  set.delta = delta;

  const long long range = high - low;
  long long origin = low;
  long long width = range;
  if (range < slot_count) {
    set.equal_width = true;
    origin = low - delta;
    width = range + 2LL * delta;
    if (width < slot_count)
      throw Error(ErrorKind::invalid_argument, "range<slots",
                  "padded range of " + std::to_string(width) + " points cannot hold " + std::to_string(slot_count) + " slots");
  }

  std::vector<int> bounds;
  bounds.push_back(low - delta);
  for (int j = 1; j < slot_count; ++j) bounds.push_back(static_cast<int>(origin + round_div(j * width, slot_count)));
  bounds.push_back(high + delta);
  for (int j = 0; j < slot_count; ++j)
    set.slots.push_back({j, slot_label(j), bounds[static_cast<std::size_t>(j)], bounds[static_cast<std::size_t>(j) + 1]});
  return set;
}

std::optional<RecommendationSlot> assign_slot(int score, const UniversityIntervalSet& set) {
  for (const auto& slot : set.slots)
    if (slot.contains(score)) return slot;
  return std::nullopt;
}

std::vector<Candidate> filter_candidates(const StudentPreference& prefs,
                                         std::span<const UniversitySummary> profiles) {
  validate_preference(prefs);
  std::vector<Candidate> out;
  for (const auto& u : profiles) {
    if (u.key.exam != prefs.exam || u.admission_tier != prefs.tier) continue;
    if (!u.location.empty() && prefs.disliked_locations.contains(u.location)) continue;
    const bool all_disliked =
        !u.majors.empty() && std::all_of(u.majors.begin(), u.majors.end(),
                                         [&](const std::string& m) { return prefs.disliked_majors.contains(m); });
    if (all_disliked) continue;
    const bool preferred =
        (!u.location.empty() && prefs.preferred_locations.contains(u.location)) ||
        std::any_of(u.majors.begin(), u.majors.end(),
                    [&](const std::string& m) { return prefs.preferred_majors.contains(m); });
    out.push_back({&u, preferred});
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.preferred != b.preferred) return a.preferred;
    if (a.profile->admission_score != b.profile->admission_score)
      return a.profile->admission_score > b.profile->admission_score;
    return a.profile->university < b.profile->university;
  });
  return out;
}

std::vector<int> resolve_base_years(const DatasetSnapshot& snapshot, const ContextKey& target,
                                    const std::vector<int>& requested) {
  std::vector<int> years;
  if (!requested.empty()) {
    for (int y : requested) {
      ContextKey k = target;
      k.year = y;
      snapshot.at(k);
      if (y >= target.year)
        throw Error(ErrorKind::invalid_argument, "base-not-before-target",
                    "base year " + std::to_string(y) + " is not before target " + std::to_string(target.year));
      years.push_back(y);
    }
  } else {
    for (int y : {target.year - 1, target.year - 2}) {
      ContextKey k = target;
      k.year = y;
      if (snapshot.find(k) != nullptr) years.push_back(y);
    }
    if (years.empty())
      throw Error(ErrorKind::unknown_context, "unknown-context", "no base year before " + to_string(target));
  }
  std::sort(years.begin(), years.end(), std::greater<>());
  years.erase(std::unique(years.begin(), years.end()), years.end());
  if (years.size() > 2)
    throw Error(ErrorKind::invalid_argument, "base-count", "at most two base years are supported");
  return years;
}

RecommendResult recommend(const RecommendRequest& request, const DatasetSnapshot& snapshot) {
  validate_preference(request.prefs);
  const ContextKey target_key{request.target_year, normalize_id(request.par), request.prefs.exam, request.prefs.tier};
  const Cohort& target = snapshot.at(target_key);
  const bool ranking = request.model == ModelId::brm || request.model == ModelId::wsm || request.model == ModelId::wpm;
  if (ranking && !target.table)
    throw Error(ErrorKind::missing_input, "missing-srt", "no score-ranking table for " + to_string(target_key));

  RecommendResult result;
  result.base_years = resolve_base_years(snapshot, target_key, request.base_years);

  PredictRequest pr;
  pr.model = request.model;
  pr.target = {&target.context, target.table ? &*target.table : nullptr, {}};
  pr.ensemble = request.ensemble;
  pr.config = request.config;
  std::map<std::string, UniversitySummary> profiles;
  for (int y : result.base_years) {
    ContextKey k = target_key;
    k.year = y;
    const Cohort& base = snapshot.at(k);
    pr.bases.push_back({&base.context, base.table ? &*base.table : nullptr, base.summaries});
    for (const auto& u : base.summaries) profiles.try_emplace(u.university, u);
  }

  std::vector<UniversitySummary> profile_list;
  for (auto& [id, u] : profiles) profile_list.push_back(u);
  const std::vector<Candidate> candidates = filter_candidates(request.prefs, profile_list);

  pr.field = ScoreField::admission;
  const std::vector<Prediction> lows = predict(pr);
  pr.field = ScoreField::highest;
  const std::vector<Prediction> highs = predict(pr);
  std::map<std::string, const Prediction*> low_by_id, high_by_id;
  for (const auto& p : lows) low_by_id[p.university] = &p;
  for (const auto& p : highs) high_by_id[p.university] = &p;

  for (int j = 0; j < request.slots; ++j) result.lists.push_back({j, slot_label(j), {}});

  for (const Candidate& c : candidates) {
    const std::string& id = c.profile->university;
    const auto lo = low_by_id.find(id);
    const auto hi = high_by_id.find(id);
    if (lo == low_by_id.end() || hi == high_by_id.end()) {
      result.diagnostics.push_back(id + ": no prediction");
      continue;
    }
    RecommendedUniversity entry;
    entry.university = id;
    entry.location = c.profile->location;
    entry.preferred = c.preferred;
    entry.predicted_low = lo->second->predicted_score;
    entry.predicted_high = hi->second->predicted_score;
    entry.flags = lo->second->flags;
    entry.flags |= hi->second->flags;
    if (entry.predicted_high < entry.predicted_low) {
      std::swap(entry.predicted_low, entry.predicted_high);
      entry.flags.set(Flag::inverted_interval);
    }
    const auto override_it = request.delta_overrides.find(id);
    const int delta = override_it != request.delta_overrides.end() ? override_it->second : request.delta;
    UniversityIntervalSet set;
    try {
      set = build_slots(entry.predicted_low, entry.predicted_high, request.slots, delta);
    } catch (const Error& e) {
      result.diagnostics.push_back(id + ": " + e.what());
      continue;
    }
    set.university = id;
    const auto slot = assign_slot(request.prefs.gaokao_score, set);
    if (!slot) continue;
    entry.slot = *slot;
    result.lists[static_cast<std::size_t>(slot->category_index)].universities.push_back(std::move(entry));
  }

  for (auto& list : result.lists) {
    std::sort(list.universities.begin(), list.universities.end(),
              [](const RecommendedUniversity& a, const RecommendedUniversity& b) {
                if (a.preferred != b.preferred) return a.preferred;
                if (a.predicted_low != b.predicted_low) return a.predicted_low > b.predicted_low;
                return a.university < b.university;
              });
  }
  return result;
}

}  // namespace rankcast
