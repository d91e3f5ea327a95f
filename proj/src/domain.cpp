#include "rankcast/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace rankcast {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::parse: return "parse";
    case ErrorKind::empty_dataset: return "empty-dataset";
    case ErrorKind::duplicate: return "duplicate";
    case ErrorKind::ordering: return "ordering";
    case ErrorKind::unknown_context: return "unknown-context";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::too_few: return "too-few";
    case ErrorKind::missing_input: return "missing-input";
    case ErrorKind::not_found: return "not-found";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string tag, const std::string& message)
    : std::runtime_error(tag + ": " + message), kind_(kind), tag_(std::move(tag)), message_(message) {}

std::string_view to_string(ExamType exam) {
  return exam == ExamType::li_ke ? "LiKe" : "WenKe";
}

ExamType parse_exam_type(std::string_view text) {
  std::string folded;
  for (char c : text) {
    if (c == '-' || c == '_' || c == ' ') continue;
    folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (folded == "like" || folded == "lk") return ExamType::li_ke;
  if (folded == "wenke" || folded == "wk") return ExamType::wen_ke;
  throw Error(ErrorKind::invalid_argument, "unknown-exam-type",
              "exam type '" + std::string(text) + "' is not LiKe or WenKe");
}

std::string_view to_string(ModelId model) {
  switch (model) {
    case ModelId::brm: return "BRM";
    case ModelId::wsm: return "WSM";
    case ModelId::wpm: return "WPM";
    case ModelId::aasm: return "AASM";
    case ModelId::aadm: return "AADM";
  }
  return "?";
}

ModelId parse_model_id(std::string_view text) {
  const std::string id = normalize_id(text);
  if (id == "brm") return ModelId::brm;
  if (id == "wsm") return ModelId::wsm;
  if (id == "wpm") return ModelId::wpm;
  if (id == "aasm") return ModelId::aasm;
  if (id == "aadm") return ModelId::aadm;
  throw Error(ErrorKind::invalid_argument, "unknown-model",
              "model '" + std::string(text) + "' is not one of brm, wsm, wpm, aasm, aadm");
}

const std::vector<ModelId>& all_models() {
  static const std::vector<ModelId> models = {ModelId::aasm, ModelId::aadm, ModelId::brm,
                                              ModelId::wsm, ModelId::wpm};
  return models;
}

std::string_view to_string(Flag flag) {
  switch (flag) {
    case Flag::clamped_to_ascl: return "clamped-to-ascl";
    case Flag::clamped_to_highest: return "clamped-to-highest";
    case Flag::rank_beyond_table: return "rank-beyond-table";
    case Flag::score_above_table: return "score-above-table";
    case Flag::score_below_table: return "score-below-table";
    case Flag::single_base_year: return "single-base-year";
    case Flag::inverted_interval: return "inverted-interval";
    case Flag::zero_mad: return "zero-mad";
    case Flag::reduced_order: return "reduced-order";
  }
  return "?";
}

std::vector<std::string> Flags::names() const {
  std::vector<std::string> out;
  for (unsigned i = 0; i <= static_cast<unsigned>(Flag::reduced_order); ++i) {
    const auto f = static_cast<Flag>(i);
    if (has(f)) out.emplace_back(to_string(f));
  }
  return out;
}

std::string to_string(const ContextKey& key) {
  return std::to_string(key.year) + "/" + key.par + "/" + std::string(to_string(key.exam)) + "/" +
         std::to_string(key.tier);
}

std::string group_label(ExamType exam, int tier) {
  return std::string(exam == ExamType::li_ke ? "LK" : "WK") + std::to_string(tier);
}

const CohortContext& validate_context(const CohortContext& ctx) {
  auto fail = [&](const char* tag, const std::string& what) {
    throw Error(ErrorKind::invalid_argument, tag, to_string(ctx.key) + ": " + what);
  };
  if (ctx.key.tier < 1 || ctx.key.tier > 3) fail("tier-out-of-range", "tier must be 1, 2 or 3");
  if (ctx.scale_max != 750 && ctx.scale_max != 480) fail("scale-unsupported", "scale must be 750 or 480");
  if (ctx.ascl < 0) fail("ascl<0", "cutoff line is negative");
  if (ctx.ascl > ctx.highest) fail("ascl>highest", "cutoff line exceeds highest score");
  if (ctx.highest > ctx.scale_max) fail("highest>scale", "highest score exceeds the scale");
  if (ctx.admitted_total < 1) fail("admitted-total<1", "no admitted students");
  if (ctx.key.par.empty()) fail("par-empty", "region id is empty");
  return ctx;
}

void validate_summary(const UniversitySummary& summary, const CohortContext* ctx) {
  const std::string where = to_string(summary.key) + "/" + summary.university;
  if (summary.university.empty())
    throw Error(ErrorKind::invalid_argument, "university-empty", where);
  if (summary.admission_score > summary.highest_score)
    throw Error(ErrorKind::ordering, "admission>highest", where);
  if (summary.enrollment < 1) throw Error(ErrorKind::invalid_argument, "enrollment<1", where);
  if (ctx != nullptr && summary.highest_score > ctx->highest)
    throw Error(ErrorKind::ordering, "highest>context-highest", where);
}

void validate_preference(const StudentPreference& prefs) {
  auto overlaps = [](const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::any_of(a.begin(), a.end(), [&](const std::string& x) { return b.contains(x); });
  };
  if (prefs.tier < 1 || prefs.tier > 3)
    throw Error(ErrorKind::invalid_argument, "tier-out-of-range", "tier must be 1, 2 or 3");
  if (prefs.gaokao_score < 0)
    throw Error(ErrorKind::invalid_argument, "score<0", "Gaokao score is negative");
  if (overlaps(prefs.preferred_locations, prefs.disliked_locations))
    throw Error(ErrorKind::invalid_argument, "location-conflict",
                "a location is both preferred and disliked");
  if (overlaps(prefs.preferred_majors, prefs.disliked_majors))
    throw Error(ErrorKind::invalid_argument, "major-conflict",
                "a major is both preferred and disliked");
}

std::string normalize_id(std::string_view text) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

int round_half_away(double value) { return static_cast<int>(std::lround(value)); }

long long round_div(long long num, long long den) {
  if (num >= 0) return (2 * num + den) / (2 * den);
  return -((-2 * num + den) / (2 * den));
}

long long floor_div(long long num, long long den) {
  long long q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

long long ceil_div(long long num, long long den) {
  long long q = num / den;
  if ((num % den != 0) && ((num < 0) == (den < 0))) ++q;
  return q;
}

}  // namespace rankcast
