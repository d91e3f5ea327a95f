#include <gtest/gtest.h>

#include <cmath>

#include "rankcast/domain.hpp"
#include "testing.hpp"

namespace rankcast {
namespace {

using testing::make_context;

TEST(ValidateContext, AcceptsTypicalCohort) {
  const CohortContext ctx = make_context(2014, 485, 708, 80000);
  EXPECT_EQ(&validate_context(ctx), &ctx);
}

TEST(ValidateContext, RejectsCutoffAboveHighest) {
  EXPECT_ERROR_TAG(validate_context(make_context(2014, 760, 708, 80000)), "ascl>highest");
}

TEST(ValidateContext, RejectsTierFour) {
  EXPECT_ERROR_TAG(validate_context(make_context(2014, 485, 708, 80000, ExamType::li_ke, 4)), "tier-out-of-range");
}

TEST(ValidateContext, RejectsOtherInvariants) {
  EXPECT_ERROR_TAG(validate_context(make_context(2014, 485, 708, 80000, ExamType::li_ke, 1, 900)),
                   "scale-unsupported");
  EXPECT_ERROR_TAG(validate_context(make_context(2014, 400, 490, 10, ExamType::li_ke, 1, 480)), "highest>scale");
  EXPECT_ERROR_TAG(validate_context(make_context(2014, 485, 708, 0)), "admitted-total<1");
  EXPECT_ERROR_TAG(validate_context(make_context(2014, 485, 708, 10, ExamType::li_ke, 1, 750, "")), "par-empty");
}

TEST(ValidateSummary, ChecksOrderingAndEnrollment) {
  UniversitySummary s;
  s.key = {2014, "henan", ExamType::li_ke, 1};
  s.university = "univa";
  s.admission_score = 620;
  s.highest_score = 668;
  s.enrollment = 135;
  EXPECT_NO_THROW(validate_summary(s));
  s.admission_score = 670;
  EXPECT_ERROR_TAG(validate_summary(s), "admission>highest");
  s.admission_score = 620;
  s.enrollment = 0;
  EXPECT_ERROR_TAG(validate_summary(s), "enrollment<1");
  s.enrollment = 1;
  const CohortContext ctx = make_context(2014, 500, 660, 1000);
  EXPECT_ERROR_TAG(validate_summary(s, &ctx), "highest>context-highest");
}

TEST(ValidatePreference, RejectsConflicts) {
  StudentPreference p;
  p.gaokao_score = 600;
  EXPECT_NO_THROW(validate_preference(p));
  p.preferred_locations = {"beijing"};
  p.disliked_locations = {"beijing"};
  EXPECT_ERROR_TAG(validate_preference(p), "location-conflict");
  p.disliked_locations.clear();
  p.preferred_majors = {"cs"};
  p.disliked_majors = {"cs"};
  EXPECT_ERROR_TAG(validate_preference(p), "major-conflict");
  p.disliked_majors.clear();
  p.gaokao_score = -1;
  EXPECT_ERROR_TAG(validate_preference(p), "score<0");
}

TEST(Parse, ExamTypeSpellings) {
  EXPECT_EQ(parse_exam_type("LiKe"), ExamType::li_ke);
  EXPECT_EQ(parse_exam_type("like"), ExamType::li_ke);
  EXPECT_EQ(parse_exam_type("Wen-Ke"), ExamType::wen_ke);
  EXPECT_ERROR_TAG(parse_exam_type("art"), "unknown-exam-type");
}

TEST(Parse, ModelIds) {
  for (ModelId m : all_models()) EXPECT_EQ(parse_model_id(to_string(m)), m);
  EXPECT_EQ(parse_model_id("wpm"), ModelId::wpm);
  EXPECT_ERROR_TAG(parse_model_id("xyz"), "unknown-model");
}

TEST(Labels, GroupLabel) {
  EXPECT_EQ(group_label(ExamType::li_ke, 1), "LK1");
  EXPECT_EQ(group_label(ExamType::wen_ke, 2), "WK2");
}

TEST(Flags, SetAndNames) {
  Flags f{Flag::zero_mad};
  EXPECT_TRUE(f.has(Flag::zero_mad));
  EXPECT_FALSE(f.has(Flag::reduced_order));
  f |= Flags{Flag::clamped_to_ascl};
  EXPECT_EQ(f.names(), (std::vector<std::string>{"clamped-to-ascl", "zero-mad"}));
  EXPECT_TRUE(Flags{}.empty());
}

TEST(Error, WhatCarriesTag) {
  const Error e(ErrorKind::parse, "malformed-row", "line 3");
  EXPECT_STREQ(e.what(), "malformed-row: line 3");
  EXPECT_EQ(e.message(), "line 3");
  EXPECT_EQ(e.kind(), ErrorKind::parse);
}

TEST(Arithmetic, RoundingHelpers) {
  EXPECT_EQ(round_half_away(600.5), 601);
  EXPECT_EQ(round_half_away(-600.5), -601);
  EXPECT_EQ(round_div(1201, 2), 601);
  EXPECT_EQ(round_div(-1201, 2), -601);
  EXPECT_EQ(round_div(1199, 2), 600);
  EXPECT_EQ(floor_div(-7, 2), -4);
  EXPECT_EQ(ceil_div(-7, 2), -3);
  EXPECT_EQ(ceil_div(7, 2), 4);
  EXPECT_EQ(floor_div(6, 3), 2);
}

TEST(Arithmetic, RoundDivMatchesFloatingReference) {
  for (long long den = 1; den <= 13; ++den)
    for (long long num = -200; num <= 200; ++num) {
      const double exact = static_cast<double>(num) / static_cast<double>(den);
      EXPECT_EQ(round_div(num, den), std::llround(exact)) << num << "/" << den;
      EXPECT_EQ(floor_div(num, den), static_cast<long long>(std::floor(exact)));
      EXPECT_EQ(ceil_div(num, den), static_cast<long long>(std::ceil(exact)));
    }
}

TEST(Normalize, TrimsAndFolds) { EXPECT_EQ(normalize_id("  UnivA \t"), "univa"); }

}  // namespace
}  // namespace rankcast
