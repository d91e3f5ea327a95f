#include "rankcast/models.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "rankcast/parallel.hpp"

namespace rankcast {

int field_of(const UniversitySummary& u, ScoreField field) {
  return field == ScoreField::admission ? u.admission_score : u.highest_score;
}

void clamp_prediction(Prediction& p, const CohortContext& target, int guard) {
  const int lo = target.ascl - guard;
  if (p.predicted_score < lo) {
    p.predicted_score = lo;
    p.flags.set(Flag::clamped_to_ascl);
  } else if (p.predicted_score > target.highest) {
    p.predicted_score = target.highest;
    p.flags.set(Flag::clamped_to_highest);
  }
}

Lookup brm_score(int base_score, const ScoreRankingTable& base, const ScoreRankingTable& target) {
  const Lookup rank = base.rank_of(base_score);
  Lookup score = target.score_of(rank.value);
  score.flags |= rank.flags;
  return score;
}

Prediction predict_brm(const std::string& university, int base_score, const ScoreRankingTable& base,
                       const ScoreRankingTable& target, const ModelConfig& config) {
  const Lookup s = brm_score(base_score, base, target);
  Prediction p{university, ModelId::brm, s.value, {base.context().key.year}, s.flags};
  clamp_prediction(p, target.context(), config.clamp_guard);
  return p;
}

// ---------------------------------------------------------------------------
// Weight slicing

int WsmPlan::bias_index(int position) const {
  if (slices == 0) return 0;
  for (std::size_t j = 0; j < intervals.size(); ++j)
    if (intervals[j].contains(position)) return static_cast<int>(j);
  throw Error(ErrorKind::invalid_argument, "position-out-of-range",
              "position " + std::to_string(position) + " is outside the plan");
}

WsmPlan wsm_plan(int universities, int ascl_target, int ascl_base) {
  if (universities < 1)
    throw Error(ErrorKind::invalid_argument, "n<1", "weight slicing needs at least one university");
  WsmPlan plan;
  plan.gap = std::abs(ascl_target - ascl_base);
  plan.sign = ascl_target >= ascl_base ? 1 : -1;
  while (plan.slices * (plan.slices + 1) / 2 < plan.gap) ++plan.slices;

  const long long d = plan.slices;
  const long long n = universities;
  int start = 1;
  for (long long j = 0; j < d; ++j) {
    if (j + 1 == d) {
      plan.intervals.push_back({start, universities});
      plan.sizes.push_back(universities - start + 1);
      break;
    }
    const int size = static_cast<int>((2 * (d - j) * n) / (d * (d + 1)));
    plan.intervals.push_back({start, start + size - 1});
    plan.sizes.push_back(size);
    start += size;
  }
  return plan;
}

std::vector<const UniversitySummary*> wsm_order(std::span<const UniversitySummary> universities, ScoreField field) {
  std::vector<const UniversitySummary*> order;
  order.reserve(universities.size());
  for (const auto& u : universities) order.push_back(&u);
  std::sort(order.begin(), order.end(), [field](const UniversitySummary* a, const UniversitySummary* b) {
    const int fa = field_of(*a, field), fb = field_of(*b, field);
    if (fa != fb) return fa > fb;
    if (a->enrollment != b->enrollment) return a->enrollment > b->enrollment;
    return a->university < b->university;
  });
  return order;
}

namespace {

void require_view(const CohortView& view, bool need_table, const char* role) {
  if (view.context == nullptr)
    throw Error(ErrorKind::missing_input, "missing-context", std::string(role) + " context is missing");
  if (need_table && view.table == nullptr)
    throw Error(ErrorKind::missing_input, "missing-table",
                std::string(role) + " score-ranking table is missing for " + to_string(view.context->key));
}

}  // namespace

std::vector<Prediction> predict_wsm(const CohortView& base, const CohortContext& target_context,
                                    const ScoreRankingTable& target_table, ScoreField field,
                                    const ModelConfig& config) {
  require_view(base, true, "base");
  const auto order = wsm_order(base.universities, field);
  std::vector<Prediction> out;
  if (order.empty()) return out;
  const WsmPlan plan = wsm_plan(static_cast<int>(order.size()), target_context.ascl, base.context->ascl);
  out.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const UniversitySummary& u = *order[i];
    const Lookup brm = brm_score(field_of(u, field), *base.table, target_table);
    const int j = plan.bias_index(static_cast<int>(i) + 1);
    Prediction p{u.university, ModelId::wsm, brm.value + plan.sign * j, {base.context->key.year}, brm.flags};
    clamp_prediction(p, target_context, config.clamp_guard);
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const Prediction& a, const Prediction& b) { return a.university < b.university; });
  return out;
}

// ---------------------------------------------------------------------------
// Weighted point

int wpm_average_density(const CohortContext& base) {
  const long long span = base.highest - base.ascl;
  if (span <= 0)
    throw Error(ErrorKind::degenerate, "degenerate-span", "base highest equals base cutoff line");
  return static_cast<int>(ceil_div(base.admitted_total, span));
}

int wpm_bias_index(int count, int delta) {
  if (delta < 1) throw Error(ErrorKind::invalid_argument, "delta<1", "average density must be positive");
  if (count < delta) return 0;
  return count / delta;
}

Prediction predict_wpm(const UniversitySummary& university, const CohortView& base,
                       const CohortContext& target_context, const ScoreRankingTable& target_table,
                       ScoreField field, const ModelConfig& config) {
  require_view(base, true, "base");
  if (base.table->provenance() == Provenance::projected)
    throw Error(ErrorKind::invalid_argument, "base-table-projected",
                "weighted point model needs an exact or interpolated base table");
  const int delta = wpm_average_density(*base.context);
  const int score = field_of(university, field);
  const int j = wpm_bias_index(base.table->count_at(score), delta);
  const int sign = target_context.ascl >= base.context->ascl ? 1 : -1;
  const Lookup brm = brm_score(score, *base.table, target_table);
  Prediction p{university.university, ModelId::wpm, brm.value + sign * j, {base.context->key.year}, brm.flags};
  clamp_prediction(p, target_context, config.clamp_guard);
  return p;
}

// ---------------------------------------------------------------------------
// Baselines and ensemble

int aasm_score(std::optional<int> prev1, std::optional<int> prev2) {
  if (!prev1 || !prev2) throw Error(ErrorKind::missing_input, "missing-base-year", "AASM needs two base years");
  return static_cast<int>(round_div(static_cast<long long>(*prev1) + *prev2, 2));
}

int aadm_score(std::optional<int> prev1, std::optional<int> prev2, std::optional<int> ascl_target,
               std::optional<int> ascl_prev1, std::optional<int> ascl_prev2) {
  if (!prev1 || !prev2 || !ascl_target || !ascl_prev1 || !ascl_prev2)
    throw Error(ErrorKind::missing_input, "missing-input", "AADM needs two base years and three cutoff lines");
  const long long twice = 2LL * *ascl_target + *prev1 + *prev2 - *ascl_prev1 - *ascl_prev2;
  return static_cast<int>(round_div(twice, 2));
}

Prediction ensemble_mean(std::span<const Prediction> predictions) {
  if (predictions.empty()) throw Error(ErrorKind::empty_dataset, "empty-ensemble", "no predictions to average");
  Prediction out = predictions.front();
  long long sum = 0;
  for (const auto& p : predictions) {
    if (p.university != out.university || p.model != out.model)
      throw Error(ErrorKind::invalid_argument, "ensemble-mismatch",
                  "ensemble mixes " + out.university + " and " + p.university);
    sum += p.predicted_score;
    out.flags |= p.flags;
  }
  out.base_years.clear();
  for (const auto& p : predictions) out.base_years.insert(out.base_years.end(), p.base_years.begin(), p.base_years.end());
  std::sort(out.base_years.begin(), out.base_years.end());
  out.base_years.erase(std::unique(out.base_years.begin(), out.base_years.end()), out.base_years.end());
  out.predicted_score = static_cast<int>(round_div(sum, static_cast<long long>(predictions.size())));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool is_ranking(ModelId m) { return m == ModelId::brm || m == ModelId::wsm || m == ModelId::wpm; }

const UniversitySummary* find_university(std::span<const UniversitySummary> list, const std::string& id) {
  for (const auto& u : list)
    if (u.university == id) return &u;
  return nullptr;
}

std::vector<Prediction> predict_one_base(const PredictRequest& req, const CohortView& base) {
  const CohortContext& target = *req.target.context;
  const ScoreRankingTable& target_table = *req.target.table;
  if (req.model == ModelId::wsm) return predict_wsm(base, target, target_table, req.field, req.config);

  std::vector<Prediction> out(base.universities.size());
  detail::parallel_for(out.size(), req.config.threads, [&](std::size_t i) {
    const UniversitySummary& u = base.universities[i];
    out[i] = req.model == ModelId::brm
                 ? predict_brm(u.university, field_of(u, req.field), *base.table, target_table, req.config)
                 : predict_wpm(u, base, target, target_table, req.field, req.config);
  });
  std::sort(out.begin(), out.end(), [](const Prediction& a, const Prediction& b) { return a.university < b.university; });
  return out;
}

std::vector<Prediction> predict_baseline(const PredictRequest& req) {
  if (req.bases.size() < 2)
    throw Error(ErrorKind::missing_input, "missing-base-year",
                std::string(to_string(req.model)) + " needs two base years");
  const CohortView& b1 = req.bases[0];
  const CohortView& b2 = req.bases[1];
  const CohortContext& target = *req.target.context;

  std::map<std::string, Prediction> out;
  auto ids = [&](const CohortView& v) {
    for (const auto& u : v.universities) out.try_emplace(u.university);
  };
  ids(b1);
  ids(b2);
  for (auto& [id, p] : out) {
    const UniversitySummary* u1 = find_university(b1.universities, id);
    const UniversitySummary* u2 = find_university(b2.universities, id);
    p.university = id;
    p.model = req.model;
    if (u1 && u2) {
      const int a1 = field_of(*u1, req.field), a2 = field_of(*u2, req.field);
      p.predicted_score = req.model == ModelId::aasm
                              ? aasm_score(a1, a2)
                              : aadm_score(a1, a2, target.ascl, b1.context->ascl, b2.context->ascl);
      p.base_years = {b1.context->key.year, b2.context->key.year};
    } else {
      const UniversitySummary* u = u1 ? u1 : u2;
      const CohortView& b = u1 ? b1 : b2;
      const int a = field_of(*u, req.field);
      p.predicted_score = req.model == ModelId::aasm ? a : target.ascl + a - b.context->ascl;
      p.base_years = {b.context->key.year};
      p.flags.set(Flag::single_base_year);
    }
    std::sort(p.base_years.begin(), p.base_years.end());
    clamp_prediction(p, target, req.config.clamp_guard);
  }
  std::vector<Prediction> result;
  result.reserve(out.size());
  for (auto& [id, p] : out) result.push_back(std::move(p));
  return result;
}

}  // namespace

std::vector<Prediction> predict(const PredictRequest& req) {
  if (req.bases.empty() || req.bases.size() > 2)
    throw Error(ErrorKind::invalid_argument, "base-count", "one or two base years are required");
  require_view(req.target, is_ranking(req.model), "target");
  for (const auto& b : req.bases) {
    require_view(b, is_ranking(req.model), "base");
    const ContextKey& t = req.target.context->key;
    const ContextKey& k = b.context->key;
    if (k.par != t.par || k.exam != t.exam || k.tier != t.tier)
      throw Error(ErrorKind::invalid_argument, "context-mismatch",
                  "base " + to_string(k) + " does not match target " + to_string(t));
  }
  if (!is_ranking(req.model)) return predict_baseline(req);

  const std::size_t used = req.ensemble ? req.bases.size() : 1;
  std::map<std::string, std::vector<Prediction>> per_university;
  for (std::size_t b = 0; b < used; ++b)
    for (auto& p : predict_one_base(req, req.bases[b])) per_university[p.university].push_back(std::move(p));

  std::vector<Prediction> result;
  result.reserve(per_university.size());
  for (auto& [id, list] : per_university) {
    Prediction p = ensemble_mean(list);
    if (used == 2 && list.size() == 1) p.flags.set(Flag::single_base_year);
    result.push_back(std::move(p));
  }
  return result;
}

}  // namespace rankcast
