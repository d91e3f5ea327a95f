#include <gtest/gtest.h>

#include <random>

#include "rankcast/recommend.hpp"
#include "testing.hpp"

namespace rankcast {
namespace {

using testing::make_context;

std::vector<std::pair<int, int>> bounds(const UniversityIntervalSet& set) {
  std::vector<std::pair<int, int>> out;
  for (const auto& s : set.slots) out.emplace_back(s.lo, s.hi);
  return out;
}

using Bounds = std::vector<std::pair<int, int>>;

TEST(Slots, ThreeSlots) {
  const auto set = build_slots(600, 630, 3, 5);
  EXPECT_EQ(bounds(set), (Bounds{{595, 610}, {610, 620}, {620, 635}}));
  EXPECT_EQ(set.slots[1].label, "B");
  EXPECT_FALSE(set.equal_width);
}

TEST(Slots, SingleSlot) { EXPECT_EQ(bounds(build_slots(600, 630, 1, 5)), (Bounds{{595, 635}})); }

TEST(Slots, DegenerateRangeFallsBackToEqualWidth) {
  const auto set = build_slots(600, 600, 3, 5);
  EXPECT_TRUE(set.equal_width);
  EXPECT_EQ(bounds(set), (Bounds{{595, 598}, {598, 602}, {602, 605}}));
}

TEST(Slots, Errors) {
  EXPECT_ERROR_TAG(build_slots(610, 600, 3, 5), "low>high");
  EXPECT_ERROR_TAG(build_slots(600, 630, 0, 5), "slots<1");
  EXPECT_ERROR_TAG(build_slots(600, 630, 3, 0), "delta<1");
  EXPECT_ERROR_TAG(build_slots(600, 600, 5, 2), "range<slots");
}

TEST(Slots, Labels) {
  EXPECT_EQ(slot_label(0), "A");
  EXPECT_EQ(slot_label(25), "Z");
  EXPECT_EQ(slot_label(26), "S27");
}

TEST(AssignSlot, Membership) {
  const auto set = build_slots(600, 630, 3, 5);
  EXPECT_EQ(assign_slot(612, set)->label, "B");
  EXPECT_FALSE(assign_slot(594, set).has_value());
  EXPECT_EQ(assign_slot(634, set)->label, "C");
  EXPECT_FALSE(assign_slot(635, set).has_value());
  EXPECT_EQ(assign_slot(595, set)->label, "A");
}

TEST(Slots, RandomPartitionProperties) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const int low = 400 + static_cast<int>(rng() % 300);
    const int high = low + static_cast<int>(rng() % 60);
    const int delta = 1 + static_cast<int>(rng() % 10);
    const int j = 1 + static_cast<int>(rng() % 10);
    if (high - low + 2 * delta < j) continue;
    const auto set = build_slots(low, high, j, delta);
    ASSERT_EQ(static_cast<int>(set.slots.size()), j);
    EXPECT_EQ(set.slots.front().lo, low - delta);
    EXPECT_EQ(set.slots.back().hi, high + delta);
    for (int k = 0; k < j; ++k) {
      EXPECT_LT(set.slots[k].lo, set.slots[k].hi);
      if (k + 1 < j) {
        EXPECT_EQ(set.slots[k].hi, set.slots[k + 1].lo);
      }
    }
    for (int s = low - delta - 2; s <= high + delta + 2; ++s) {
      int hits = 0;
      for (const auto& slot : set.slots) hits += slot.contains(s) ? 1 : 0;
      EXPECT_EQ(hits, (s >= low - delta && s < high + delta) ? 1 : 0);
    }
  }
}

UniversitySummary profile(const std::string& id, int admission, const std::string& location,
                          std::set<std::string> majors = {}, int tier = 1) {
  UniversitySummary u;
  u.key = {2014, "henan", ExamType::li_ke, tier};
  u.university = id;
  u.admission_score = admission;
  u.highest_score = admission + 20;
  u.location = location;
  u.majors = std::move(majors);
  u.admission_tier = tier;
  return u;
}

TEST(FilterCandidates, HardConstraintsAndOrder) {
  const std::vector<UniversitySummary> profiles{
      profile("a", 650, "beijing", {"law"}),  profile("b", 640, "shanghai", {"cs"}),
      profile("c", 660, "wuhan", {"art"}),    profile("d", 670, "xian", {}, 2),
      profile("e", 655, "chengdu", {"med"}),
  };
  StudentPreference prefs;
  prefs.gaokao_score = 640;
  prefs.disliked_locations = {"wuhan"};
  prefs.preferred_majors = {"cs"};
  prefs.disliked_majors = {"med"};
  const auto out = filter_candidates(prefs, profiles);
  std::vector<std::string> ids;
  for (const auto& c : out) ids.push_back(c.profile->university);
  EXPECT_EQ(ids, (std::vector<std::string>{"b", "a"}));
  EXPECT_TRUE(out[0].preferred);
  EXPECT_FALSE(out[1].preferred);
}

DatasetSnapshot two_university_snapshot() {
  SnapshotBuilder b;
  for (int year : {2013, 2014, 2015}) b.add_context(make_context(year, 550, 700, 5000));
  std::vector<UniversitySummary> us;
  for (int year : {2013, 2014}) {
    UniversitySummary u1 = profile("u1", 600, "beijing");
    u1.highest_score = 630;
    UniversitySummary u2 = profile("u2", 560, "shanghai");
    u2.highest_score = 600;
    for (auto* u : {&u1, &u2}) {
      u->key.year = year;
      us.push_back(*u);
    }
  }
  b.add_summaries(us);
  return b.build();
}

RecommendRequest aasm_request(int score) {
  RecommendRequest req;
  req.prefs.gaokao_score = score;
  req.par = "henan";
  req.target_year = 2015;
  req.model = ModelId::aasm;
  return req;
}

TEST(Recommend, EachUniversityInItsOwnList) {
  const auto snap = two_university_snapshot();
  const auto result = recommend(aasm_request(600), snap);
  ASSERT_EQ(result.lists.size(), 3u);
  EXPECT_EQ(result.base_years, (std::vector<int>{2014, 2013}));
  ASSERT_EQ(result.lists[0].universities.size(), 1u);
  EXPECT_EQ(result.lists[0].universities[0].university, "u1");
  EXPECT_TRUE(result.lists[1].universities.empty());
  ASSERT_EQ(result.lists[2].universities.size(), 1u);
  EXPECT_EQ(result.lists[2].universities[0].university, "u2");
  EXPECT_EQ(result.lists[2].universities[0].slot.lo, 587);
}

TEST(Recommend, OutsideEveryRangeGivesEmptyLists) {
  const auto snap = two_university_snapshot();
  const auto result = recommend(aasm_request(700), snap);
  ASSERT_EQ(result.lists.size(), 3u);
  for (const auto& l : result.lists) EXPECT_TRUE(l.universities.empty());
}

TEST(Recommend, FixtureLandsInB) {
  const auto snap = load_snapshot(testing::fixture_dir());
  RecommendRequest req = aasm_request(612);
  req.prefs.exam = ExamType::wen_ke;
  const auto result = recommend(req, snap);
  ASSERT_EQ(result.lists.size(), 3u);
  EXPECT_TRUE(result.lists[0].universities.empty());
  ASSERT_EQ(result.lists[1].universities.size(), 1u);
  const auto& u = result.lists[1].universities[0];
  EXPECT_EQ(u.university, "delta");
  EXPECT_EQ(u.predicted_low, 600);
  EXPECT_EQ(u.predicted_high, 630);
  EXPECT_EQ(u.slot.lo, 610);
  EXPECT_EQ(u.slot.hi, 620);
  EXPECT_TRUE(result.lists[2].universities.empty());
}

TEST(Recommend, DeltaOverrideWidensPadding) {
  const auto snap = two_university_snapshot();
  RecommendRequest req = aasm_request(637);
  EXPECT_TRUE(recommend(req, snap).lists[2].universities.empty());
  req.delta_overrides["u1"] = 10;
  ASSERT_EQ(recommend(req, snap).lists[2].universities.size(), 1u);
}

TEST(Recommend, RankingModelNeedsTargetTable) {
  const auto snap = two_university_snapshot();
  RecommendRequest req = aasm_request(600);
  req.model = ModelId::wpm;
  EXPECT_ERROR_TAG(recommend(req, snap), "missing-srt");
}

TEST(ResolveBaseYears, DefaultsAndErrors) {
  const auto snap = two_university_snapshot();
  const ContextKey target{2015, "henan", ExamType::li_ke, 1};
  EXPECT_EQ(resolve_base_years(snap, target, {}), (std::vector<int>{2014, 2013}));
  EXPECT_EQ(resolve_base_years(snap, target, {2013}), (std::vector<int>{2013}));
  EXPECT_ERROR_TAG(resolve_base_years(snap, target, {2015}), "base-not-before-target");
  EXPECT_ERROR_TAG(resolve_base_years(snap, target, {2012}), "unknown-context");
  EXPECT_ERROR_TAG(resolve_base_years(snap, {2013, "henan", ExamType::li_ke, 1}, {}), "unknown-context");
}

}  // namespace
}  // namespace rankcast
