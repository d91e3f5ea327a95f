#include <gtest/gtest.h>

#include <random>

#include "rankcast/ingest.hpp"
#include "rankcast/models.hpp"
#include "testing.hpp"

namespace rankcast {
namespace {

using testing::make_context;

ScoreRankingTable table_of(int year, std::vector<int> scores, int ascl) {
  const int highest = *std::max_element(scores.begin(), scores.end());
  return build_srt(make_context(year, ascl, highest, static_cast<int>(scores.size())), scores);
}

// rank = 1 + 10 * (highest - s) over [lo, highest]
ScoreRankingTable linear_table(const CohortContext& ctx, int lo) {
  std::vector<int> ranks;
  for (int s = lo; s <= ctx.highest; ++s) ranks.push_back(1 + 10 * (ctx.highest - s));
  return ScoreRankingTable::from_dense(ctx, Provenance::exact, lo, ranks, ranks.front());
}

UniversitySummary university(const std::string& id, int admission, int enrollment = 10, int year = 2014) {
  UniversitySummary u;
  u.key = {year, "henan", ExamType::li_ke, 1};
  u.university = id;
  u.admission_score = admission;
  u.highest_score = admission + 5;
  u.enrollment = enrollment;
  return u;
}

TEST(Brm, HandTrace) {
  const auto base = table_of(2014, {700, 690, 690, 680}, 650);
  const auto target = table_of(2015, {705, 698, 698, 688}, 650);
  EXPECT_EQ(predict_brm("u", 690, base, target).predicted_score, 698);
  EXPECT_EQ(predict_brm("u", 680, base, target).predicted_score, 688);
  EXPECT_EQ(predict_brm("u", 700, base, target).predicted_score, 705);
}

TEST(Brm, IdentityOnSameTable) {
  const auto t = table_of(2014, {700, 690, 690, 680, 655, 655, 651}, 650);
  for (int s : {700, 690, 680, 655, 651}) EXPECT_EQ(predict_brm("u", s, t, t).predicted_score, s);
}

TEST(Brm, ClampsToGuardedCutoff) {
  // Base rank 5 lands on 690 in a target table whose cutoff line is 700.
  const auto base = table_of(2014, {700, 690, 690, 680}, 650);
  const CohortContext ctx = make_context(2015, 700, 705, 5);
  std::vector<int> ranks(16, 1);
  ranks[0] = 5;
  const auto target = ScoreRankingTable::from_dense(ctx, Provenance::exact, 690, ranks, 5);
  ModelConfig cfg;
  cfg.clamp_guard = 0;
  const Prediction p = predict_brm("u", 660, base, target, cfg);
  EXPECT_EQ(p.predicted_score, 700);
  EXPECT_TRUE(p.flags.has(Flag::clamped_to_ascl));
  cfg.clamp_guard = 10;
  EXPECT_EQ(predict_brm("u", 660, base, target, cfg).predicted_score, 690);
}

TEST(WsmPlan, SixUniversitiesGapThree) {
  const WsmPlan p = wsm_plan(6, 503, 500);
  EXPECT_EQ(p.gap, 3);
  EXPECT_EQ(p.slices, 2);
  EXPECT_EQ(p.sizes, (std::vector<int>{4, 2}));
  EXPECT_EQ(p.intervals[0].first, 1);
  EXPECT_EQ(p.intervals[0].last, 4);
  EXPECT_EQ(p.intervals[1].first, 5);
  EXPECT_EQ(p.intervals[1].last, 6);
}

TEST(WsmPlan, ZeroGap) {
  const WsmPlan p = wsm_plan(6, 500, 500);
  EXPECT_EQ(p.slices, 0);
  EXPECT_TRUE(p.intervals.empty());
  EXPECT_EQ(p.bias_index(3), 0);
}

TEST(WsmPlan, HundredUniversitiesGapTen) {
  const WsmPlan p = wsm_plan(100, 490, 500);
  EXPECT_EQ(p.slices, 4);
  EXPECT_EQ(p.sizes, (std::vector<int>{40, 30, 20, 10}));
  EXPECT_EQ(p.sign, -1);
  EXPECT_EQ(p.bias_index(40), 0);
  EXPECT_EQ(p.bias_index(41), 1);
  EXPECT_EQ(p.bias_index(100), 3);
  EXPECT_ERROR_TAG(p.bias_index(101), "position-out-of-range");
}

TEST(WsmPlan, SmallCounts) {
  const WsmPlan p = wsm_plan(1, 600, 500);
  EXPECT_EQ(p.slices, 14);
  int total = 0;
  for (int s : p.sizes) total += s;
  EXPECT_EQ(total, 1);
  EXPECT_ERROR_TAG(wsm_plan(0, 1, 0), "n<1");
}

std::vector<UniversitySummary> six_universities() {
  std::vector<UniversitySummary> us;
  for (int i = 0; i < 6; ++i) us.push_back(university("u" + std::to_string(i), 690 - 10 * i));
  return us;
}

std::vector<int> wsm_scores(int target_ascl) {
  const CohortContext base_ctx = make_context(2014, 500, 700, 2001);
  const auto base_table = linear_table(base_ctx, 490);
  const auto us = six_universities();
  const CohortView base{&base_ctx, &base_table, us};
  const CohortContext target_ctx = make_context(2015, target_ascl, 700, 2001);
  const auto target_table = linear_table(target_ctx, 490);
  std::vector<int> out;
  for (const auto& p : predict_wsm(base, target_ctx, target_table)) out.push_back(p.predicted_score);
  return out;
}

TEST(Wsm, BiasByPosition) {
  EXPECT_EQ(wsm_scores(503), (std::vector<int>{690, 680, 670, 660, 651, 641}));
  EXPECT_EQ(wsm_scores(497), (std::vector<int>{690, 680, 670, 660, 649, 639}));
  EXPECT_EQ(wsm_scores(500), (std::vector<int>{690, 680, 670, 660, 650, 640}));
}

TEST(Wsm, OrderBreaksTiesByEnrollmentThenId) {
  std::vector<UniversitySummary> us{university("b", 600, 5), university("a", 600, 5), university("c", 600, 9),
                                    university("d", 610, 1)};
  const auto order = wsm_order(us, ScoreField::admission);
  std::vector<std::string> ids;
  for (const auto* u : order) ids.push_back(u->university);
  EXPECT_EQ(ids, (std::vector<std::string>{"d", "c", "a", "b"}));
}

TEST(Wpm, AverageDensityAndBias) {
  EXPECT_EQ(wpm_average_density(make_context(2014, 500, 700, 2000)), 10);
  EXPECT_EQ(wpm_average_density(make_context(2014, 500, 700, 2001)), 11);
  EXPECT_EQ(wpm_bias_index(25, 10), 2);
  EXPECT_EQ(wpm_bias_index(7, 10), 0);
  EXPECT_EQ(wpm_bias_index(10, 10), 1);
  EXPECT_ERROR_TAG(wpm_bias_index(3, 0), "delta<1");
  EXPECT_ERROR_TAG(wpm_average_density(make_context(2014, 700, 700, 5)), "degenerate-span");
}

TEST(Wpm, DenseScoreGetsBias) {
  // 25 students hold 650 in the base year; density is 10 per point.
  std::vector<int> scores(25, 650);
  for (int s = 651; s <= 700; ++s) scores.push_back(s);
  const CohortContext base_ctx = make_context(2014, 600, 700, 1000);
  const auto base_table = build_srt(base_ctx, scores);
  const auto target_ctx = make_context(2015, 590, 700, 1000);
  const std::vector<UniversitySummary> us{university("u", 650)};
  const CohortView base{&base_ctx, &base_table, us};
  const Prediction p = predict_wpm(us[0], base, target_ctx, base_table);
  EXPECT_EQ(p.predicted_score, 648);
  const Prediction q = predict_wpm(university("v", 660), base, target_ctx, base_table);
  EXPECT_EQ(q.predicted_score, 660);
}

TEST(Wpm, RejectsProjectedBase) {
  const CohortContext ctx = make_context(2014, 500, 700, 2001);
  std::vector<int> ranks;
  for (int s = 500; s <= 700; ++s) ranks.push_back(1 + 10 * (700 - s));
  const auto t = ScoreRankingTable::from_dense(ctx, Provenance::projected, 500, ranks, 2001);
  const std::vector<UniversitySummary> us{university("u", 650)};
  EXPECT_ERROR_TAG(predict_wpm(us[0], {&ctx, &t, us}, ctx, t), "base-table-projected");
}

TEST(Baselines, Aasm) {
  EXPECT_EQ(aasm_score(600, 610), 605);
  EXPECT_EQ(aasm_score(600, 600), 600);
  EXPECT_EQ(aasm_score(601, 600), 601);
  EXPECT_ERROR_TAG(aasm_score(600, std::nullopt), "missing-base-year");
}

TEST(Baselines, Aadm) {
  EXPECT_EQ(aadm_score(600, 610, 520, 510, 530), 605);
  EXPECT_EQ(aadm_score(580, 590, 500, 500, 500), 585);
  EXPECT_EQ(aadm_score(601, 600, 500, 500, 500), aasm_score(601, 600));
  EXPECT_ERROR_TAG(aadm_score(600, 610, std::nullopt, 510, 530), "missing-input");
}

Prediction prediction(int score, int year) { return {"u", ModelId::wpm, score, {year}, {}}; }

TEST(Ensemble, MeanRoundsHalfAway) {
  const std::vector<Prediction> a{prediction(698, 2014), prediction(702, 2013)};
  EXPECT_EQ(ensemble_mean(a).predicted_score, 700);
  EXPECT_EQ(ensemble_mean(a).base_years, (std::vector<int>{2013, 2014}));
  const std::vector<Prediction> b{prediction(697, 2014), prediction(702, 2013)};
  EXPECT_EQ(ensemble_mean(b).predicted_score, 700);
  const std::vector<Prediction> c{prediction(698, 2014)};
  EXPECT_EQ(ensemble_mean(c).predicted_score, 698);
  EXPECT_ERROR_TAG(ensemble_mean(std::span<const Prediction>{}), "empty-ensemble");
  std::vector<Prediction> mixed = a;
  mixed[1].university = "v";
  EXPECT_ERROR_TAG(ensemble_mean(mixed), "ensemble-mismatch");
}

class FixturePredict : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { snapshot_ = new DatasetSnapshot(load_snapshot(testing::fixture_dir())); }
  static void TearDownTestSuite() { delete snapshot_; }

  static CohortView view(int year) {
    const Cohort& c = snapshot_->at({year, "henan", ExamType::li_ke, 1});
    return {&c.context, c.table ? &*c.table : nullptr, c.summaries};
  }

  static std::map<std::string, int> run(ModelId model, bool ensemble = true) {
    PredictRequest req;
    req.model = model;
    req.target = view(2015);
    req.bases = {view(2014), view(2013)};
    req.ensemble = ensemble;
    std::map<std::string, int> out;
    for (const auto& p : predict(req)) out[p.university] = p.predicted_score;
    return out;
  }

  static DatasetSnapshot* snapshot_;
};

DatasetSnapshot* FixturePredict::snapshot_ = nullptr;

using Scores = std::map<std::string, int>;

TEST_F(FixturePredict, HandTracedModels) {
  EXPECT_EQ(run(ModelId::brm), (Scores{{"alpha", 660}, {"beta", 614}, {"gamma", 552}}));
  EXPECT_EQ(run(ModelId::wsm), (Scores{{"alpha", 663}, {"beta", 618}, {"gamma", 556}}));
  EXPECT_EQ(run(ModelId::wpm), run(ModelId::brm));
  EXPECT_EQ(run(ModelId::aasm), (Scores{{"alpha", 653}, {"beta", 606}, {"gamma", 544}}));
  EXPECT_EQ(run(ModelId::aadm), (Scores{{"alpha", 668}, {"beta", 621}, {"gamma", 559}}));
}

TEST_F(FixturePredict, SingleBaseWithoutEnsemble) {
  // From 2014 alone: rank(655) = 1 + 10 * 50 = 501 -> 2015 score 710 - 50 = 660.
  EXPECT_EQ(run(ModelId::brm, false).at("alpha"), 660);
}

TEST_F(FixturePredict, Errors) {
  PredictRequest req;
  req.target = view(2015);
  EXPECT_ERROR_TAG(predict(req), "base-count");
  req.bases = {view(2014)};
  req.model = ModelId::aasm;
  EXPECT_ERROR_TAG(predict(req), "missing-base-year");
  const Cohort& w = snapshot_->at({2014, "henan", ExamType::wen_ke, 1});
  req.bases = {CohortView{&w.context, nullptr, w.summaries}, view(2013)};
  EXPECT_ERROR_TAG(predict(req), "context-mismatch");
  req.model = ModelId::brm;
  const Cohort& wt = snapshot_->at({2015, "henan", ExamType::wen_ke, 1});
  req.target = {&wt.context, nullptr, {}};
  EXPECT_ERROR_TAG(predict(req), "missing-table");
}

TEST_F(FixturePredict, ThreadCountDoesNotChangeOutput) {
  PredictRequest req;
  req.model = ModelId::wpm;
  req.target = view(2015);
  req.bases = {view(2014), view(2013)};
  const auto serial = predict(req);
  req.config.threads = 4;
  EXPECT_EQ(predict(req), serial);
}

}  // namespace
}  // namespace rankcast
