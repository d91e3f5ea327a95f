#include "rankcast/srt.hpp"

#include <algorithm>
#include <map>
#include <cmath>

namespace rankcast {

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::exact: return "exact";
    case Provenance::interpolated: return "interpolated";
    case Provenance::projected: return "projected";
  }
  return "?";
}

Provenance parse_provenance(std::string_view text) {
  const std::string id = normalize_id(text);
  if (id == "exact") return Provenance::exact;
  if (id == "interpolated") return Provenance::interpolated;
  if (id == "projected") return Provenance::projected;
  throw Error(ErrorKind::invalid_argument, "unknown-provenance",
              "provenance '" + std::string(text) + "' is not exact, interpolated or projected");
}

ScoreRankingTable ScoreRankingTable::from_dense(CohortContext context, Provenance provenance,
                                                int lowest_score, std::vector<int> ranks,
                                                int population) {
  if (ranks.empty()) throw Error(ErrorKind::empty_dataset, "empty-table", "table has no entries");
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] < 1)
      throw Error(ErrorKind::invalid_argument, "rank<1",
                  "rank " + std::to_string(ranks[i]) + " at score " +
                      std::to_string(lowest_score + static_cast<int>(i)));
    if (i + 1 < ranks.size() && ranks[i] < ranks[i + 1])
      throw Error(ErrorKind::ordering, "non-monotone",
                  "rank increases with score at " + std::to_string(lowest_score + static_cast<int>(i)));
  }
  // An unoccupied lowest score ranks one past everyone above it.
  if (population < ranks.front() - 1)
    throw Error(ErrorKind::invalid_argument, "population<rank",
                "population " + std::to_string(population) + " is below the lowest-score rank");
  ScoreRankingTable t;
  t.context_ = std::move(context);
  t.provenance_ = provenance;
  t.lowest_ = lowest_score;
  t.ranks_ = std::move(ranks);
  t.population_ = population;
  return t;
}

Lookup ScoreRankingTable::rank_of(int score) const {
  if (score > highest_score()) return {1, {Flag::score_above_table}};
  if (score < lowest_) return {population_ + 1, {Flag::score_below_table}};
  return {ranks_[static_cast<std::size_t>(score - lowest_)], {}};
}

Lookup ScoreRankingTable::score_of(int rank) const {
  if (rank < 1) throw Error(ErrorKind::invalid_argument, "rank<1", "rank must be at least 1");
  if (rank > population_) return {lowest_, {Flag::rank_beyond_table}};
  // ranks_ is nonincreasing, so {i : ranks_[i] <= rank} is a suffix.
  const auto it = std::partition_point(ranks_.begin(), ranks_.end(), [rank](int r) { return r > rank; });
  if (it == ranks_.end()) return {highest_score(), {Flag::score_above_table}};
  return {lowest_ + static_cast<int>(it - ranks_.begin()), {}};
}

int ScoreRankingTable::count_at(int score) const {
  return std::abs(rank_of(score - 1).value - rank_of(score).value);
}

std::vector<SrtEntry> ScoreRankingTable::entries() const {
  std::vector<SrtEntry> out;
  out.reserve(ranks_.size());
  for (int s = highest_score(); s >= lowest_; --s) out.push_back({s, ranks_[static_cast<std::size_t>(s - lowest_)]});
  return out;
}

ScoreRankingTable build_srt(const CohortContext& context, std::span<const int> scores) {
  validate_context(context);
  if (scores.empty()) throw Error(ErrorKind::empty_dataset, "empty-dataset", "no scores to rank");
  const int lo = context.ascl;
  const int hi = context.highest;
  std::vector<int> counts(static_cast<std::size_t>(hi - lo + 1), 0);
  int population = 0;
  for (int s : scores) {
    if (s > hi)
      throw Error(ErrorKind::invalid_argument, "score>highest",
                  "score " + std::to_string(s) + " exceeds highest " + std::to_string(hi));
    if (s < lo) continue;
    ++counts[static_cast<std::size_t>(s - lo)];
    ++population;
  }
  if (population == 0)
    throw Error(ErrorKind::empty_dataset, "empty-dataset", "no score at or above the cutoff line");

  std::vector<int> ranks(counts.size());
  int above = 0;
  for (std::size_t i = counts.size(); i-- > 0;) {
    ranks[i] = above + 1;
    above += counts[i];
  }
  return ScoreRankingTable::from_dense(context, Provenance::exact, lo, std::move(ranks), population);
}

ScoreRankingTable build_srt(const CohortContext& context, std::span<const AdmissionRecord> records) {
  std::vector<int> scores;
  scores.reserve(records.size());
  for (const auto& r : records) {
    if (r.key != context.key)
      throw Error(ErrorKind::unknown_context, "context-mismatch",
                  "record for " + to_string(r.key) + " in table for " + to_string(context.key));
    scores.push_back(r.score);
  }
  return build_srt(context, scores);
}

int repair_monotone(std::vector<int>& ranks) {
  int changed = 0;
  for (std::size_t i = ranks.size(); i-- > 1;) {
    if (ranks[i - 1] < ranks[i]) {
      ranks[i - 1] = ranks[i];
      ++changed;
    }
  }
  return changed;
}

// ---------------------------------------------------------------------------
// Monotone cubic interpolation

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Three-point endpoint slope, kept shape-preserving.
double end_slope(double h0, double h1, double del0, double del1) {
  double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
  if (sign_of(d) != sign_of(del0)) {
    d = 0.0;
  } else if (sign_of(del0) != sign_of(del1) && std::abs(d) > std::abs(3.0 * del0)) {
    d = 3.0 * del0;
  }
  return d;
}

}  // namespace

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n)
    throw Error(ErrorKind::too_few, "too-few", "interpolation needs at least two knots");
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x_[k + 1] - x_[k];
    if (!(h[k] > 0.0)) throw Error(ErrorKind::ordering, "knots-unsorted", "knot abscissae must increase");
    del[k] = (y_[k + 1] - y_[k]) / h[k];
  }
  slopes_.assign(n, 0.0);
  if (n == 2) {
    slopes_[0] = slopes_[1] = del[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (sign_of(del[k - 1]) * sign_of(del[k]) > 0) {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      slopes_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
    }
  }
  slopes_[0] = end_slope(h[0], h[1], del[0], del[1]);
  slopes_[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
}

double Pchip::operator()(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  k = std::min(k, x_.size() - 2);
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * slopes_[k] +
         (-2 * t3 + 3 * t2) * y_[k + 1] + (t3 - t2) * h * slopes_[k + 1];
}

ScoreRankingTable interpolate_sparse(const CohortContext& context, std::span<const SrtEntry> knots) {
  if (knots.size() < 2) throw Error(ErrorKind::too_few, "too-few", "interpolation needs at least two knots");
  std::vector<SrtEntry> sorted(knots.begin(), knots.end());
  std::sort(sorted.begin(), sorted.end(), [](const SrtEntry& a, const SrtEntry& b) { return a.score < b.score; });
  std::vector<double> x, y;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].rank < 1)
      throw Error(ErrorKind::invalid_argument, "rank<1", "knot rank below 1 at score " + std::to_string(sorted[i].score));
    if (i > 0 && sorted[i].score == sorted[i - 1].score)
      throw Error(ErrorKind::duplicate, "duplicate-knot", "score " + std::to_string(sorted[i].score) + " repeats");
    if (i > 0 && sorted[i].rank > sorted[i - 1].rank)
      throw Error(ErrorKind::ordering, "non-monotone",
                  "rank rises from score " + std::to_string(sorted[i - 1].score) + " to " +
                      std::to_string(sorted[i].score));
    x.push_back(sorted[i].score);
    y.push_back(sorted[i].rank);
  }
  const Pchip curve(x, y);
  const int lo = sorted.front().score;
  const int hi = sorted.back().score;
  std::vector<int> ranks;
  ranks.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (int s = lo; s <= hi; ++s) ranks.push_back(std::max(1, round_half_away(curve(s))));
  repair_monotone(ranks);
  const int population = std::max(context.admitted_total, ranks.front());
  return ScoreRankingTable::from_dense(context, Provenance::interpolated, lo, std::move(ranks), population);
}

// ---------------------------------------------------------------------------
// Projection

AmendedTable amend_table(const ScoreRankingTable& previous, int ascl_current, int highest_current) {
  const CohortContext& prev = previous.context();
  const long long span = prev.highest - prev.ascl;
  if (span <= 0)
    throw Error(ErrorKind::degenerate, "degenerate-span", "previous highest equals previous cutoff line");

  AmendedTable out;
  out.ascl_shift = ascl_current - prev.ascl;
  const long long d = out.ascl_shift;
  for (const SrtEntry& e : previous.entries()) {
    if (e.score < prev.ascl || e.score > prev.highest) continue;
    const long long shift = d >= 0 ? ceil_div((highest_current - e.score) * d, span)
                                   : floor_div((prev.highest - e.score) * d, span);
    out.points.push_back({e.score + static_cast<int>(shift), e.rank, static_cast<int>(shift)});
  }
  if (out.points.empty())
    throw Error(ErrorKind::empty_dataset, "empty-table", "previous table has no points inside its cutoff span");
  out.rh = out.points.front().score;
  out.rl = out.points.front().score;
  for (const auto& p : out.points) {
    out.rh = std::max(out.rh, p.score);
    out.rl = std::min(out.rl, p.score);
  }
  return out;
}

double FittedCurve::operator()(double score) const {
  const double s = std::clamp(score, rl, rh);
  return s >= split_score ? high(s) : low(s);
}

Projection project_srt(const ScoreRankingTable& previous, const CohortContext& target,
                       const ProjectionConfig& config) {
  validate_context(target);
  if (config.order < 0) throw Error(ErrorKind::invalid_argument, "order<0", "series order is negative");

  Projection out{amend_table(previous, target.ascl, target.highest), {}, previous};
  const AmendedTable& amended = out.amended;
  FittedCurve& curve = out.curve;
  curve.rl = amended.rl;
  curve.rh = amended.rh;
  curve.split_score = amended.rh - (amended.rh - amended.rl) / 5.0;

  // Source scores merged by the shift share one amended score; that score's
  // rank is the best rank among them.
  std::map<int, int> merged;
  for (const auto& p : amended.points) {
    const auto [it, fresh] = merged.emplace(p.score, p.rank);
    if (!fresh) it->second = std::min(it->second, p.rank);
  }
  std::vector<double> low_x, low_y, high_x, high_y;
  for (const auto& [score, rank] : merged) {
    if (score >= curve.split_score) {
      high_x.push_back(score);
      high_y.push_back(rank);
    } else {
      low_x.push_back(score);
      low_y.push_back(rank);
    }
  }
  // With a single distinct amended score the low segment is empty.
  if (low_x.empty()) {
    low_x = high_x;
    low_y = high_y;
  }
  TrigFit high_fit = fit_trig_series(high_x, high_y, config.order, config.fit);
  TrigFit low_fit = fit_trig_series(low_x, low_y, config.order, config.fit);
  curve.high = std::move(high_fit.series);
  curve.high_stats = high_fit.stats;
  curve.low = std::move(low_fit.series);
  curve.low_stats = low_fit.stats;
  if (curve.high_stats.order_used < config.order || curve.low_stats.order_used < config.order)
    curve.flags.set(Flag::reduced_order);

  const int n_prev = previous.population();
  std::vector<int> ranks;
  ranks.reserve(static_cast<std::size_t>(target.highest - target.ascl + 1));
  for (int s = target.ascl; s <= target.highest; ++s) ranks.push_back(round_half_away(std::clamp(curve(s), -1e9, 1e9)));
  curve.repaired_points = repair_monotone(ranks);
  for (int& r : ranks) r = std::clamp(r, 1, n_prev);

  out.table = ScoreRankingTable::from_dense(target, Provenance::projected, target.ascl, std::move(ranks), n_prev);
  return out;
}

}  // namespace rankcast
