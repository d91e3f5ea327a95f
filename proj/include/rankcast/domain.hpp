#pragma once
// Shared value types for admission-score prediction.
//
// Scores are integer points on the cohort scale (750 or 480). A cohort is one
// (year, region, exam type, tier) admission universe.

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rankcast {

enum class ErrorKind {
  invalid_argument,
  parse,
  empty_dataset,
  duplicate,
  ordering,
  unknown_context,
  degenerate,
  too_few,
  missing_input,
  not_found,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type. `tag` names the
// violated invariant ("ascl>highest", "tier-out-of-range", ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string tag, const std::string& message);

  ErrorKind kind() const { return kind_; }
  const std::string& tag() const { return tag_; }
  // what() without the tag prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string tag_;
  std::string message_;
};

enum class ExamType { li_ke, wen_ke };

std::string_view to_string(ExamType exam);
// Accepts "LiKe"/"WenKe" in any case, with or without a hyphen.
ExamType parse_exam_type(std::string_view text);

enum class ModelId { brm, wsm, wpm, aasm, aadm };

std::string_view to_string(ModelId model);
ModelId parse_model_id(std::string_view text);
// Report order: baselines first, ranking models after.
const std::vector<ModelId>& all_models();

// Diagnostic markers attached to lookups and predictions.
enum class Flag : std::uint8_t {
  clamped_to_ascl,
  clamped_to_highest,
  rank_beyond_table,
  score_above_table,
  score_below_table,
  single_base_year,
  inverted_interval,
  zero_mad,
  reduced_order,
};

std::string_view to_string(Flag flag);

class Flags {
 public:
  Flags() = default;
  Flags(std::initializer_list<Flag> flags) {
    for (Flag f : flags) set(f);
  }

  void set(Flag f) { bits_ |= bit(f); }
  bool has(Flag f) const { return (bits_ & bit(f)) != 0; }
  bool empty() const { return bits_ == 0; }
  Flags& operator|=(const Flags& other) {
    bits_ |= other.bits_;
    return *this;
  }
  std::vector<std::string> names() const;

  friend bool operator==(const Flags&, const Flags&) = default;

 private:
  static std::uint32_t bit(Flag f) { return 1u << static_cast<unsigned>(f); }
  std::uint32_t bits_ = 0;
};

struct ContextKey {
  int year = 0;
  std::string par;
  ExamType exam = ExamType::li_ke;
  int tier = 1;

  friend auto operator<=>(const ContextKey&, const ContextKey&) = default;
};

std::string to_string(const ContextKey& key);
// "LK1", "WK2", ...
std::string group_label(ExamType exam, int tier);

struct CohortContext {
  ContextKey key;
  int ascl = 0;            // admission score cutoff line
  int highest = 0;         // highest score in the tier
  int admitted_total = 1;  // students at or above the cutoff
  int scale_max = 750;

  friend bool operator==(const CohortContext&, const CohortContext&) = default;
};

// Returns ctx unchanged or throws Error naming the first violated invariant.
const CohortContext& validate_context(const CohortContext& ctx);

struct AdmissionRecord {
  ContextKey key;
  std::string university;
  std::string major;
  int score = 0;

  friend bool operator==(const AdmissionRecord&, const AdmissionRecord&) = default;
};

struct UniversitySummary {
  ContextKey key;
  std::string university;
  int admission_score = 0;  // minimum retained admit score
  int highest_score = 0;
  int enrollment = 1;
  std::string location;
  std::set<std::string> majors;
  int ranking_group = 0;
  int admission_tier = 1;

  friend bool operator==(const UniversitySummary&, const UniversitySummary&) = default;
};

void validate_summary(const UniversitySummary& summary, const CohortContext* ctx = nullptr);

struct Prediction {
  std::string university;
  ModelId model = ModelId::brm;
  int predicted_score = 0;
  std::vector<int> base_years;
  Flags flags;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct StudentPreference {
  int gaokao_score = 0;
  ExamType exam = ExamType::li_ke;
  int tier = 1;
  std::set<std::string> preferred_locations;
  std::set<std::string> disliked_locations;
  std::set<std::string> preferred_majors;
  std::set<std::string> disliked_majors;

  friend bool operator==(const StudentPreference&, const StudentPreference&) = default;
};

void validate_preference(const StudentPreference& prefs);

// Half-open score interval [lo, hi) for one category of one university.
struct RecommendationSlot {
  int category_index = 0;
  std::string label;
  int lo = 0;
  int hi = 0;

  bool contains(int score) const { return score >= lo && score < hi; }
  friend bool operator==(const RecommendationSlot&, const RecommendationSlot&) = default;
};

// Trimmed, ASCII case-folded identifier.
std::string normalize_id(std::string_view text);

// Rounds half away from zero.
int round_half_away(double value);
// round(num / den) with halves away from zero; den > 0.
long long round_div(long long num, long long den);
long long floor_div(long long num, long long den);
long long ceil_div(long long num, long long den);

}  // namespace rankcast
