#include <charconv>
#include <sstream>

#include <json.hpp>

#include "rankcast/app.hpp"

namespace rankcast {

using Json = nlohmann::ordered_json;

namespace {

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

Json flags_json(const Flags& flags) {
  Json out = Json::array();
  for (const auto& n : flags.names()) out.push_back(n);
  return out;
}

Json key_json(const ContextKey& key) {
  return Json{{"year", key.year}, {"par", key.par}, {"exam", std::string(to_string(key.exam))}, {"tier", key.tier}};
}

Json strings_json(const std::vector<std::string>& items) {
  Json out = Json::array();
  for (const auto& s : items) out.push_back(s);
  return out;
}

// Collects every bad field of a request document before failing.
class FieldReader {
 public:
  explicit FieldReader(const Json& doc) : doc_(doc) {
    if (!doc_.is_object()) problem("", "request body must be an object");
  }

  std::optional<int> integer(const std::string& name, bool required) {
    const Json* v = get(name, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number_integer()) {
      problem(name, "expected an integer");
      return std::nullopt;
    }
    return v->get<int>();
  }

  std::optional<std::string> text(const std::string& name, bool required) {
    const Json* v = get(name, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) {
      problem(name, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> boolean(const std::string& name) {
    const Json* v = get(name, false);
    if (v == nullptr) return std::nullopt;
    if (!v->is_boolean()) {
      problem(name, "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::vector<int> integers(const std::string& name) {
    std::vector<int> out;
    const Json* v = get(name, false);
    if (v == nullptr) return out;
    if (!v->is_array()) {
      problem(name, "expected an array of integers");
      return out;
    }
    for (const auto& item : *v) {
      if (!item.is_number_integer()) {
        problem(name, "expected an array of integers");
        return {};
      }
      out.push_back(item.get<int>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& name) {
    std::vector<std::string> out;
    const Json* v = get(name, false);
    if (v == nullptr) return out;
    if (v->is_string()) return {v->get<std::string>()};
    if (!v->is_array()) {
      problem(name, "expected an array of strings");
      return out;
    }
    for (const auto& item : *v) {
      if (!item.is_string()) {
        problem(name, "expected an array of strings");
        return {};
      }
      out.push_back(item.get<std::string>());
    }
    return out;
  }

  std::set<std::string> id_set(const std::string& name) {
    std::set<std::string> out;
    for (const auto& s : strings(name)) out.insert(normalize_id(s));
    return out;
  }

  std::map<std::string, int> int_map(const std::string& name) {
    std::map<std::string, int> out;
    const Json* v = get(name, false);
    if (v == nullptr) return out;
    if (!v->is_object()) {
      problem(name, "expected an object of integers");
      return out;
    }
    for (const auto& [k, item] : v->items()) {
      if (!item.is_number_integer()) {
        problem(name + "." + k, "expected an integer");
        continue;
      }
      out[normalize_id(k)] = item.get<int>();
    }
    return out;
  }

  // Runs `parse` on a text field and records a field problem on failure.
  template <typename T, typename F>
  std::optional<T> parsed(const std::string& name, bool required, F parse) {
    const auto raw = text(name, required);
    if (!raw) return std::nullopt;
    try {
      return parse(*raw);
    } catch (const Error& e) {
      problem(name, e.message());
      return std::nullopt;
    }
  }

  void problem(const std::string& field, const std::string& message) {
    problems_.push_back(Json{{"field", field}, {"message", message}});
  }

  void check(const std::string& field, bool ok, const std::string& message) {
    if (!ok) problem(field, message);
  }

  bool ok() const { return problems_.empty(); }
  const Json& problems() const { return problems_; }

 private:
  const Json* get(const std::string& name, bool required) {
    if (!doc_.is_object()) return nullptr;
    const auto it = doc_.find(name);
    if (it == doc_.end() || it->is_null()) {
      if (required) problem(name, "required");
      return nullptr;
    }
    return &*it;
  }

  const Json& doc_;
  Json problems_ = Json::array();
};

ApiResponse respond(int status, std::string body) { return {status, std::move(body)}; }

ApiResponse field_errors(const FieldReader& reader) {
  Json doc{{"error",
            {{"kind", "invalid_argument"},
             {"tag", "invalid-fields"},
             {"message", "request has invalid fields"},
             {"fields", reader.problems()}}}};
  return respond(400, dump(doc));
}

std::optional<Json> parse_body(const std::string& body, ApiResponse& failure) {
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    failure = respond(400, error_json(Error(ErrorKind::parse, "malformed-json", e.what())));
    return std::nullopt;
  }
}

template <typename F>
ApiResponse guarded(F body) {
  try {
    return body();
  } catch (const Error& e) {
    return respond(status_for(e.kind()), error_json(e));
  } catch (const std::exception& e) {
    Json doc{{"error", {{"kind", "internal"}, {"tag", "internal"}, {"message", e.what()}}}};
    return respond(500, dump(doc));
  }
}

std::optional<int> to_int(const std::string& text) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return out;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::istringstream in(path);
  std::string part;
  while (std::getline(in, part, '/'))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

std::vector<ModelId> parse_models(const std::vector<std::string>& names) {
  std::vector<ModelId> out;
  for (const auto& n : names) {
    if (normalize_id(n) == "all") return all_models();
    out.push_back(parse_model_id(n));
  }
  return out;
}

}  // namespace

std::string_view to_string(ScoreField field) { return field == ScoreField::admission ? "admission" : "highest"; }

ScoreField parse_score_field(std::string_view text) {
  const std::string t = normalize_id(text);
  if (t == "admission" || t == "low") return ScoreField::admission;
  if (t == "highest" || t == "high") return ScoreField::highest;
  throw Error(ErrorKind::parse, "unknown-field", "unknown score field '" + std::string(text) + "'");
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::unknown_context:
    case ErrorKind::not_found:
    case ErrorKind::missing_input:
      return 404;
    default:
      return 400;
  }
}

std::string error_json(const Error& error) {
  Json doc{{"error", {{"kind", std::string(to_string(error.kind()))}, {"tag", error.tag()}, {"message", error.message()}}}};
  return dump(doc);
}

PredictOutcome run_predict(const DatasetSnapshot& snapshot, const AppConfig& config, const PredictQuery& query) {
  PredictOutcome out;
  out.target = {query.target_year, normalize_id(query.par), query.exam, query.tier};
  out.model = query.model;
  out.field = query.field;
  const Cohort& target = snapshot.at(out.target);
  out.base_years = resolve_base_years(snapshot, out.target, query.base_years);

  PredictRequest pr;
  pr.model = query.model;
  pr.target = {&target.context, target.table ? &*target.table : nullptr, {}};
  for (int y : out.base_years) {
    ContextKey k = out.target;
    k.year = y;
    const Cohort& base = snapshot.at(k);
    pr.bases.push_back({&base.context, base.table ? &*base.table : nullptr, base.summaries});
  }
  pr.field = query.field;
  pr.ensemble = query.ensemble;
  pr.config = config.model_config();
  out.predictions = predict(pr);
  return out;
}

AccuracyReport run_evaluate(const DatasetSnapshot& snapshot, const AppConfig& config, ReportRequest request) {
  if (request.pds.empty()) {
    int scale = 750;
    for (const auto& [key, cohort] : snapshot.cohorts())
      if (key.year == request.target_year && (request.par.empty() || key.par == normalize_id(request.par))) {
        scale = cohort.context.scale_max;
        break;
      }
    request.pds = config.pds_for(scale);
  }
  request.config = config.model_config();
  request.threads = config.threads;
  return accuracy_report(snapshot, request);
}

std::string srt_json(const DatasetSnapshot& snapshot, const SrtQuery& query) {
  if (query.score.has_value() == query.rank.has_value())
    throw Error(ErrorKind::invalid_argument, "score-xor-rank", "give exactly one of score or rank");
  const Cohort& cohort = snapshot.at(query.key);
  if (!cohort.table)
    throw Error(ErrorKind::missing_input, "missing-srt", "no score-ranking table for " + to_string(query.key));
  const ScoreRankingTable& table = *cohort.table;
  Json doc = key_json(query.key);
  doc["provenance"] = std::string(to_string(table.provenance()));
  if (query.score) {
    const Lookup r = table.rank_of(*query.score);
    doc["score"] = *query.score;
    doc["rank"] = r.value;
    doc["flags"] = flags_json(r.flags);
  } else {
    const Lookup s = table.score_of(*query.rank);
    doc["rank"] = *query.rank;
    doc["score"] = s.value;
    doc["flags"] = flags_json(s.flags);
  }
  return dump(doc);
}

std::string predict_json(const PredictOutcome& outcome) {
  Json doc = key_json(outcome.target);
  doc["model"] = std::string(to_string(outcome.model));
  doc["field"] = std::string(to_string(outcome.field));
  doc["base_years"] = outcome.base_years;
  Json rows = Json::array();
  for (const auto& p : outcome.predictions)
    rows.push_back(Json{{"university", p.university},
                        {"model", std::string(to_string(p.model))},
                        {"predicted_score", p.predicted_score},
                        {"base_years", p.base_years},
                        {"flags", flags_json(p.flags)}});
  doc["predictions"] = std::move(rows);
  return dump(doc);
}

std::string recommend_json(const RecommendRequest& request, const RecommendResult& result) {
  Json doc{{"year", request.target_year},
           {"par", normalize_id(request.par)},
           {"exam", std::string(to_string(request.prefs.exam))},
           {"tier", request.prefs.tier},
           {"score", request.prefs.gaokao_score},
           {"model", std::string(to_string(request.model))},
           {"slots", request.slots},
           {"delta", request.delta},
           {"base_years", result.base_years}};
  Json lists = Json::array();
  for (const auto& list : result.lists) {
    Json unis = Json::array();
    for (const auto& u : list.universities)
      unis.push_back(Json{{"university", u.university},
                          {"location", u.location},
                          {"predicted_low", u.predicted_low},
                          {"predicted_high", u.predicted_high},
                          {"slot", {{"label", u.slot.label}, {"lo", u.slot.lo}, {"hi", u.slot.hi}}},
                          {"preferred", u.preferred},
                          {"flags", flags_json(u.flags)}});
    lists.push_back(Json{{"index", list.category_index}, {"label", list.label}, {"universities", std::move(unis)}});
  }
  doc["lists"] = std::move(lists);
  doc["diagnostics"] = strings_json(result.diagnostics);
  return dump(doc);
}

std::string evaluate_json(const AccuracyReport& report) {
  Json models = Json::array();
  for (ModelId m : report.models) models.push_back(std::string(to_string(m)));
  Json cells = Json::array();
  for (const auto& c : report.cells)
    cells.push_back(Json{{"model", std::string(to_string(c.model))},
                         {"pd", c.pd},
                         {"group", c.group},
                         {"percentage", c.percentage},
                         {"numerator", c.numerator},
                         {"denominator", c.denominator},
                         {"missing_truth", c.missing_truth}});
  Json doc{{"models", std::move(models)},
           {"pds", report.pds},
           {"groups", strings_json(report.groups)},
           {"cells", std::move(cells)},
           {"diagnostics", strings_json(report.diagnostics)}};
  return dump(doc);
}

Api::Api(const DatasetSnapshot& snapshot, AppConfig config) : snapshot_(snapshot), config_(std::move(config)) {}

ApiResponse Api::health() const {
  return respond(200, dump(Json{{"status", "ok"}, {"contexts", snapshot_.cohorts().size()}}));
}

ApiResponse Api::datasets() const {
  Json rows = Json::array();
  for (const auto& [key, cohort] : snapshot_.cohorts()) {
    Json row = key_json(key);
    row["ascl"] = cohort.context.ascl;
    row["highest"] = cohort.context.highest;
    row["admitted_total"] = cohort.context.admitted_total;
    row["scale_max"] = cohort.context.scale_max;
    row["records"] = cohort.records.size();
    row["universities"] = cohort.summaries.size();
    row["srt"] = cohort.table ? Json(std::string(to_string(cohort.table->provenance()))) : Json(nullptr);
    rows.push_back(std::move(row));
  }
  return respond(200, dump(Json{{"contexts", std::move(rows)}, {"diagnostics", strings_json(snapshot_.diagnostics())}}));
}

ApiResponse Api::srt(const std::string& par, const std::string& year, const std::string& exam,
                     const std::string& tier, const std::map<std::string, std::string>& query) const {
  return guarded([&] {
    FieldReader fields(Json::object());
    SrtQuery q;
    q.key.par = normalize_id(par);
    const auto y = to_int(year);
    const auto t = to_int(tier);
    fields.check("year", y.has_value(), "expected an integer");
    fields.check("tier", t.has_value(), "expected an integer");
    try {
      q.key.exam = parse_exam_type(exam);
    } catch (const Error& e) {
      fields.problem("exam", e.message());
    }
    for (const auto& [name, value] : query) {
      if (name != "score" && name != "rank") {
        fields.problem(name, "unknown parameter");
        continue;
      }
      const auto v = to_int(value);
      fields.check(name, v.has_value(), "expected an integer");
      if (v) (name == "score" ? q.score : q.rank) = v;
    }
    fields.check("score", q.score.has_value() != q.rank.has_value(), "give exactly one of score or rank");
    if (!fields.ok()) return field_errors(fields);
    q.key.year = *y;
    q.key.tier = *t;
    return respond(200, srt_json(snapshot_, q));
  });
}

ApiResponse Api::predict(const std::string& body) const {
  return guarded([&] {
    ApiResponse failure;
    const auto doc = parse_body(body, failure);
    if (!doc) return failure;
    FieldReader f(*doc);
    PredictQuery q;
    q.par = f.text("par", true).value_or("");
    q.exam = f.parsed<ExamType>("exam", true, parse_exam_type).value_or(ExamType::li_ke);
    q.tier = f.integer("tier", true).value_or(1);
    q.target_year = f.integer("target", true).value_or(0);
    q.base_years = f.integers("base_years");
    q.model = f.parsed<ModelId>("model", false, parse_model_id).value_or(ModelId::wpm);
    q.field = f.parsed<ScoreField>("field", false, parse_score_field).value_or(ScoreField::admission);
    q.ensemble = f.boolean("ensemble").value_or(true);
    if (!f.ok()) return field_errors(f);
    return respond(200, predict_json(run_predict(snapshot_, config_, q)));
  });
}

ApiResponse Api::recommend(const std::string& body) const {
  return guarded([&] {
    ApiResponse failure;
    const auto doc = parse_body(body, failure);
    if (!doc) return failure;
    FieldReader f(*doc);
    RecommendRequest r;
    r.par = f.text("par", true).value_or("");
    r.target_year = f.integer("target", true).value_or(0);
    r.base_years = f.integers("base_years");
    r.model = f.parsed<ModelId>("model", false, parse_model_id).value_or(ModelId::wpm);
    r.slots = f.integer("slots", false).value_or(3);
    r.delta = f.integer("delta", false).value_or(config_.delta);
    r.delta_overrides = f.int_map("delta_overrides");
    r.ensemble = f.boolean("ensemble").value_or(true);
    r.prefs.gaokao_score = f.integer("score", true).value_or(0);
    r.prefs.exam = f.parsed<ExamType>("exam", true, parse_exam_type).value_or(ExamType::li_ke);
    r.prefs.tier = f.integer("tier", true).value_or(1);
    r.prefs.preferred_locations = f.id_set("preferred_locations");
    r.prefs.disliked_locations = f.id_set("disliked_locations");
    r.prefs.preferred_majors = f.id_set("preferred_majors");
    r.prefs.disliked_majors = f.id_set("disliked_majors");
    f.check("slots", r.slots >= 1 && r.slots <= 26, "must be between 1 and 26");
    f.check("delta", r.delta >= 1, "must be positive");
    f.check("score", r.prefs.gaokao_score >= 0, "must be nonnegative");
    for (const auto& [id, d] : r.delta_overrides) f.check("delta_overrides." + id, d >= 1, "must be positive");
    try {
      validate_preference(r.prefs);
    } catch (const Error& e) {
      f.problem(e.tag() == "location-conflict" ? "preferred_locations" : "preferred_majors", e.message());
    }
    if (!f.ok()) return field_errors(f);
    r.config = config_.model_config();
    return respond(200, recommend_json(r, rankcast::recommend(r, snapshot_)));
  });
}

ApiResponse Api::evaluate(const std::string& body) const {
  return guarded([&] {
    ApiResponse failure;
    const auto doc = parse_body(body, failure);
    if (!doc) return failure;
    FieldReader f(*doc);
    ReportRequest r;
    r.par = f.text("par", false).value_or("");
    r.target_year = f.integer("target", true).value_or(0);
    r.base_years = f.integers("base_years");
    try {
      r.models = parse_models(f.strings("models"));
    } catch (const Error& e) {
      f.problem("models", e.message());
    }
    r.pds = f.integers("pds");
    for (int pd : r.pds) f.check("pds", pd >= 0, "must be nonnegative");
    r.ensemble = f.boolean("ensemble").value_or(true);
    if (!f.ok()) return field_errors(f);
    return respond(200, evaluate_json(run_evaluate(snapshot_, config_, r)));
  });
}

ApiResponse Api::handle(const std::string& method, const std::string& path,
                        const std::map<std::string, std::string>& query, const std::string& body) const {
  const auto parts = split_path(path);
  auto route = [&]() -> std::optional<std::string> {
    if (parts.size() == 1 && parts[0] == "health") return "GET";
    if (parts.size() == 1 && parts[0] == "datasets") return "GET";
    if (parts.size() == 5 && parts[0] == "srt") return "GET";
    if (parts.size() == 1 && (parts[0] == "predict" || parts[0] == "recommend" || parts[0] == "evaluate"))
      return "POST";
    return std::nullopt;
  }();
  if (!route) return respond(404, error_json(Error(ErrorKind::not_found, "no-route", "no endpoint at " + path)));
  if (method != *route)
    return respond(405, error_json(Error(ErrorKind::invalid_argument, "method", path + " accepts " + *route)));

  if (parts[0] == "health") return health();
  if (parts[0] == "datasets") return datasets();
  if (parts[0] == "srt") return srt(parts[1], parts[2], parts[3], parts[4], query);
  if (parts[0] == "predict") return predict(body);
  if (parts[0] == "recommend") return recommend(body);
  return evaluate(body);
}

}  // namespace rankcast
