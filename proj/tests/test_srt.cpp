#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rankcast/srt.hpp"
#include "rankcast/trig_fit.hpp"
#include "testing.hpp"

namespace rankcast {
namespace {

using testing::make_context;

ScoreRankingTable four_students() {
  const std::vector<int> scores{700, 690, 690, 680};
  return build_srt(make_context(2014, 650, 700, 4), scores);
}

TEST(BuildSrt, RanksFromDefinition) {
  const auto t = four_students();
  EXPECT_EQ(t.rank_of(700).value, 1);
  EXPECT_EQ(t.rank_of(690).value, 2);
  EXPECT_EQ(t.rank_of(680).value, 4);
  EXPECT_EQ(t.rank_of(695).value, 2);
  EXPECT_EQ(t.rank_of(650).value, 5);
  EXPECT_EQ(t.rank_of(689).value, 4);
  EXPECT_EQ(t.population(), 4);
  EXPECT_EQ(t.provenance(), Provenance::exact);
}

TEST(BuildSrt, ScoreOfInvertsRankBlocks) {
  const auto t = four_students();
  EXPECT_EQ(t.score_of(1).value, 700);
  EXPECT_EQ(t.score_of(2).value, 690);
  EXPECT_EQ(t.score_of(3).value, 690);
  EXPECT_EQ(t.score_of(4).value, 680);
  EXPECT_ERROR_TAG(t.score_of(0), "rank<1");
  const Lookup beyond = t.score_of(9);
  EXPECT_EQ(beyond.value, 650);
  EXPECT_TRUE(beyond.flags.has(Flag::rank_beyond_table));
}

TEST(BuildSrt, CountAt) {
  const auto t = four_students();
  EXPECT_EQ(t.count_at(690), 2);
  EXPECT_EQ(t.count_at(695), 0);
  EXPECT_EQ(t.count_at(680), 1);
}

TEST(BuildSrt, OutOfDomainLookupsAreFlagged) {
  const auto t = four_students();
  const Lookup above = t.rank_of(720);
  EXPECT_EQ(above.value, 1);
  EXPECT_TRUE(above.flags.has(Flag::score_above_table));
  const Lookup below = t.rank_of(600);
  EXPECT_EQ(below.value, 5);
  EXPECT_TRUE(below.flags.has(Flag::score_below_table));
}

TEST(BuildSrt, ScoresBelowCutoffLeaveTheDomain) {
  const std::vector<int> scores{700, 690, 640};
  const auto t = build_srt(make_context(2014, 650, 700, 2), scores);
  EXPECT_EQ(t.population(), 2);
  EXPECT_EQ(t.lowest_score(), 650);
}

TEST(BuildSrt, Errors) {
  const std::vector<int> none;
  EXPECT_ERROR_TAG(build_srt(make_context(2014, 650, 700, 4), none), "empty-dataset");
  const std::vector<int> high{710};
  EXPECT_ERROR_TAG(build_srt(make_context(2014, 650, 700, 4), high), "score>highest");
  EXPECT_ERROR_TAG(ScoreRankingTable::from_dense(make_context(2014, 1, 3, 5), Provenance::exact, 1, {1, 3, 1}, 5),
                   "non-monotone");
  EXPECT_ERROR_TAG(ScoreRankingTable::from_dense(make_context(2014, 1, 3, 5), Provenance::exact, 1, {9, 3, 1}, 5),
                   "population<rank");
}

TEST(BuildSrt, RandomCohortsMatchBruteForce) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> score(400, 700);
    std::vector<int> scores(1 + rng() % 300);
    for (int& s : scores) s = score(rng);
    const auto t = build_srt(make_context(2014, 400, 700, 1), scores);
    for (int s = 400; s <= 700; ++s) {
      const int above = static_cast<int>(std::count_if(scores.begin(), scores.end(), [s](int x) { return x > s; }));
      ASSERT_EQ(t.rank_of(s).value, above + 1);
      const int tied = static_cast<int>(std::count(scores.begin(), scores.end(), s));
      ASSERT_EQ(t.count_at(s), tied);
      if (tied > 0) {
        ASSERT_EQ(t.score_of(above + 1).value, s);
      }
    }
  }
}

TEST(RepairMonotone, RunningMaximumFromTheTop) {
  std::vector<int> ranks{9, 7, 8, 3, 4, 1};
  EXPECT_EQ(repair_monotone(ranks), 2);
  EXPECT_EQ(ranks, (std::vector<int>{9, 8, 8, 4, 4, 1}));
}

TEST(Pchip, MatchesReferenceValues) {
  const Pchip p({0, 1, 3, 4, 7}, {0, 2, 3, 7, 8});
  const std::vector<double> slopes{2.5, 0.857142857142857, 0.972972972972973, 0.716417910447761, 0.0};
  for (std::size_t i = 0; i < slopes.size(); ++i) EXPECT_NEAR(p.slopes()[i], slopes[i], 1e-12);
  EXPECT_NEAR(p(0.5), 1.2053571428571428, 1e-12);
  EXPECT_NEAR(p(2), 2.471042471042471, 1e-12);
  EXPECT_NEAR(p(3.5), 5.032069382815652, 1e-12);
  EXPECT_NEAR(p(5), 7.577667219458265, 1e-12);
  EXPECT_NEAR(p(6.5), 7.97567716970702, 1e-12);
}

TEST(Pchip, DecreasingRankShape) {
  const Pchip p({500, 505, 510, 515, 520}, {400, 250, 150, 60, 1});
  EXPECT_NEAR(p(502), 333.52, 1e-9);
  EXPECT_NEAR(p(507), 206.6147368421053, 1e-9);
  EXPECT_NEAR(p(513), 92.84888731896855, 1e-9);
  EXPECT_NEAR(p(518), 21.18958389261745, 1e-9);
}

TEST(Pchip, Errors) {
  EXPECT_ERROR_TAG(Pchip({1}, {1}), "too-few");
  EXPECT_ERROR_TAG(Pchip({1, 1}, {1, 2}), "knots-unsorted");
}

TEST(Interpolate, KnotsReproducedExactly) {
  const std::vector<SrtEntry> knots{{700, 1}, {695, 4}, {690, 30}, {685, 31}, {680, 90}};
  const auto t = interpolate_sparse(make_context(2014, 680, 700, 90), knots);
  for (const auto& k : knots) EXPECT_EQ(t.rank_of(k.score).value, k.rank);
  EXPECT_EQ(t.provenance(), Provenance::interpolated);
  for (int s = 680; s < 700; ++s) EXPECT_GE(t.rank_of(s).value, t.rank_of(s + 1).value);
}

TEST(Interpolate, LinearDataIsExact) {
  std::vector<SrtEntry> knots;
  for (int s = 700; s >= 500; s -= 5) knots.push_back({s, 1 + 10 * (700 - s)});
  const auto t = interpolate_sparse(make_context(2014, 500, 700, 2001), knots);
  for (int s = 500; s <= 700; ++s) EXPECT_EQ(t.rank_of(s).value, 1 + 10 * (700 - s)) << s;
}

TEST(Interpolate, Errors) {
  const std::vector<SrtEntry> one{{700, 1}};
  EXPECT_ERROR_TAG(interpolate_sparse(make_context(2014, 500, 700, 10), one), "too-few");
  const std::vector<SrtEntry> dup{{700, 1}, {700, 2}};
  EXPECT_ERROR_TAG(interpolate_sparse(make_context(2014, 500, 700, 10), dup), "duplicate-knot");
  const std::vector<SrtEntry> rising{{700, 5}, {690, 2}};
  EXPECT_ERROR_TAG(interpolate_sparse(make_context(2014, 500, 700, 10), rising), "non-monotone");
}

ScoreRankingTable linear_table(int lo, int hi, int step) {
  std::vector<int> ranks;
  for (int s = lo; s <= hi; ++s) ranks.push_back(1 + step * (hi - s));
  return ScoreRankingTable::from_dense(make_context(2014, lo, hi, ranks.front()), Provenance::exact, lo, ranks,
                                       ranks.front());
}

TEST(Amend, ZeroShiftIsIdentity) {
  const auto prev = linear_table(500, 700, 10);
  const AmendedTable a = amend_table(prev, 500, 700);
  const auto entries = prev.entries();
  ASSERT_EQ(a.points.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    EXPECT_EQ(a.points[i].score, entries[i].score);
    EXPECT_EQ(a.points[i].rank, entries[i].rank);
    EXPECT_EQ(a.points[i].shift, 0);
  }
  EXPECT_EQ(a.rh, 700);
  EXPECT_EQ(a.rl, 500);
}

TEST(Amend, PositiveShiftPinsTheTop) {
  const auto prev = linear_table(500, 700, 10);
  const AmendedTable a = amend_table(prev, 510, 700);
  EXPECT_EQ(a.ascl_shift, 10);
  EXPECT_EQ(a.points.front().shift, 0);
  EXPECT_EQ(a.points.back().shift, 10);
  EXPECT_EQ(a.rl, 510);
  // s = 600: ceil(100 * 10 / 200) = 5; s = 599: ceil(5.05) = 6
  EXPECT_EQ(a.points[100].shift, 5);
  EXPECT_EQ(a.points[101].shift, 6);
}

TEST(Amend, NegativeShiftFloors) {
  const auto prev = linear_table(500, 700, 10);
  const AmendedTable a = amend_table(prev, 490, 700);
  EXPECT_EQ(a.points.front().shift, 0);
  EXPECT_EQ(a.points.back().shift, -10);
  // floor((700 - 699) * -10 / 200) = floor(-0.05) = -1
  EXPECT_EQ(a.points[1].shift, -1);
  for (const auto& p : a.points) {
    EXPECT_GE(p.score, a.rl);
    EXPECT_LE(p.score, a.rh);
  }
}

TEST(Amend, DegenerateSpan) {
  const auto prev = ScoreRankingTable::from_dense(make_context(2014, 700, 700, 1), Provenance::exact, 700, {1}, 1);
  EXPECT_ERROR_TAG(amend_table(prev, 690, 700), "degenerate-span");
}

TEST(Project, ZeroShiftReproducesSmoothCurve) {
  std::vector<int> ranks;
  for (int s = 500; s <= 700; ++s) ranks.push_back(1 + static_cast<int>(std::lround(2000.0 * std::pow((700 - s) / 200.0, 2))));
  const auto prev = ScoreRankingTable::from_dense(make_context(2014, 500, 700, ranks.front()), Provenance::exact, 500,
                                                  ranks, ranks.front());
  CohortContext target = prev.context();
  target.key.year = 2015;
  const Projection p = project_srt(prev, target);
  EXPECT_EQ(p.table.provenance(), Provenance::projected);
  EXPECT_EQ(p.table.lowest_score(), 500);
  EXPECT_EQ(p.table.highest_score(), 700);
  for (int s = 500; s <= 700; ++s) EXPECT_NEAR(p.table.rank_of(s).value, prev.rank_of(s).value, 3) << s;
}

TEST(Project, OutputIsMonotoneAndClamped) {
  const auto prev = linear_table(500, 700, 10);
  for (int d : {-30, -7, 0, 9, 40}) {
    CohortContext target = prev.context();
    target.ascl = 500 + d;
    const Projection p = project_srt(prev, target);
    EXPECT_EQ(p.table.lowest_score(), 500 + d);
    int last = p.table.rank_of(700).value;
    EXPECT_GE(last, 1);
    for (int s = 699; s >= 500 + d; --s) {
      const int r = p.table.rank_of(s).value;
      EXPECT_GE(r, last);
      EXPECT_LE(r, prev.population());
      last = r;
    }
  }
}

TEST(Project, SmallTablesReduceOrder) {
  const auto prev = linear_table(695, 700, 3);
  CohortContext target = prev.context();
  const Projection p = project_srt(prev, target);
  EXPECT_TRUE(p.curve.flags.has(Flag::reduced_order));
  EXPECT_LT(p.curve.high_stats.order_used, 3);
}

TEST(TrigFit, RecoversKnownSeries) {
  const double omega = 0.021;
  std::vector<double> x, y;
  for (int s = 500; s <= 650; ++s) {
    const double t = s - 500;
    x.push_back(s);
    y.push_back(900 + 300 * std::cos(omega * t) - 120 * std::sin(omega * t) + 40 * std::cos(2 * omega * t) +
                15 * std::sin(3 * omega * t));
  }
  for (TrigWeighting w : {TrigWeighting::uniform, TrigWeighting::relative}) {
    TrigFitOptions opt;
    opt.weighting = w;
    const TrigFit fit = fit_trig_series(x, y, 3, opt);
    EXPECT_TRUE(fit.stats.converged);
    EXPECT_EQ(fit.stats.order_used, 3);
    EXPECT_LT(fit.stats.max_abs, 1e-4);
    EXPECT_NEAR(fit.series.omega, omega, 1e-7);
  }
}

TEST(TrigFit, LinearSolveAtFixedOmega) {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(3 + 2 * std::cos(0.2 * i));
  }
  const TrigSeries s = fit_trig_linear(x, y, 1, 0.2, 0.0);
  EXPECT_NEAR(s.a0, 3, 1e-9);
  EXPECT_NEAR(s.a[0], 2, 1e-9);
  EXPECT_NEAR(s.b[0], 0, 1e-9);
}

TEST(TrigFit, Errors) {
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_ERROR_TAG(fit_trig_series(a, b, 3), "size-mismatch");
  const std::vector<double> none;
  EXPECT_ERROR_TAG(fit_trig_series(none, none, 3), "too-few");
  EXPECT_ERROR_TAG(fit_trig_series(a, a, -1), "order<0");
}

}  // namespace
}  // namespace rankcast
