#include "rankcast/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "rankcast/app.hpp"

namespace rankcast {

namespace {

struct Selector {
  std::string par;
  std::optional<int> year;
  std::string exam;
  std::optional<int> tier;

  void add(CLI::App* cmd, bool required) {
    auto* p = cmd->add_option("--par", par, "Region");
    auto* e = cmd->add_option("--exam", exam, "Exam type (like, wenke)");
    auto* t = cmd->add_option("--tier", tier, "Admission tier");
    if (required) {
      p->required();
      e->required();
      t->required();
    }
  }

  bool matches(const ContextKey& key) const {
    if (!par.empty() && key.par != normalize_id(par)) return false;
    if (year && key.year != *year) return false;
    if (!exam.empty() && key.exam != parse_exam_type(exam)) return false;
    if (tier && key.tier != *tier) return false;
    return true;
  }

  ContextKey key_or(const ContextKey& fallback) const {
    ContextKey k = fallback;
    if (!par.empty()) k.par = normalize_id(par);
    if (year) k.year = *year;
    if (!exam.empty()) k.exam = parse_exam_type(exam);
    if (tier) k.tier = *tier;
    return k;
  }
};

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string join(const std::vector<int>& items, char sep) {
  std::vector<std::string> s;
  for (int v : items) s.push_back(std::to_string(v));
  return join(s, sep);
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::istringstream in(item);
    std::string part;
    while (std::getline(in, part, ','))
      if (!normalize_id(part).empty()) out.push_back(normalize_id(part));
  }
  return out;
}

// Writes to --out when given, else to the command's stdout.
template <typename F>
void emit(const std::string& path, std::ostream& out, F write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(ErrorKind::missing_input, "unwritable", "cannot write " + path);
  write(file);
}

ContextIndex read_index(const std::string& path) {
  ContextIndex index;
  if (path.empty()) return index;
  for (const auto& c : read_contexts(path)) index.emplace(c.key, c);
  return index;
}

// Picks the single context that `records` belong to after applying the selector.
ContextKey single_key(const std::vector<ContextKey>& keys, const Selector& sel, const std::string& what) {
  std::set<ContextKey> found;
  for (const auto& k : keys)
    if (sel.matches(k)) found.insert(k);
  if (found.empty()) throw Error(ErrorKind::empty_dataset, "empty-dataset", "no " + what + " match the selection");
  if (found.size() > 1)
    throw Error(ErrorKind::invalid_argument, "several-contexts",
                what + " span " + std::to_string(found.size()) + " contexts; narrow with --par/--year/--exam/--tier");
  return *found.begin();
}

std::string predictions_csv(const PredictOutcome& outcome) {
  std::ostringstream out;
  out << "university,model,predicted_score,base_years,flags\n";
  for (const auto& p : outcome.predictions)
    out << p.university << ',' << to_string(p.model) << ',' << p.predicted_score << ',' << join(p.base_years, ';')
        << ',' << join(p.flags.names(), ';') << '\n';
  return out.str();
}

std::string recommend_text(const RecommendRequest& req, const RecommendResult& result) {
  std::ostringstream out;
  out << "score " << req.prefs.gaokao_score << ", model " << to_string(req.model) << ", base years "
      << join(result.base_years, ',') << '\n';
  for (const auto& list : result.lists) {
    out << list.label << " (" << list.universities.size() << ")\n";
    for (const auto& u : list.universities) {
      out << "  " << u.university << "  predicted " << u.predicted_low << '-' << u.predicted_high << "  slot ["
          << u.slot.lo << ',' << u.slot.hi << ')';
      if (!u.location.empty()) out << "  " << u.location;
      if (u.preferred) out << "  preferred";
      if (!u.flags.empty()) out << "  " << join(u.flags.names(), ',');
      out << '\n';
    }
  }
  for (const auto& d : result.diagnostics) out << "note: " << d << '\n';
  return out.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Admission score prediction from score-ranking tables", "rankcast"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::map<std::string, std::string> overrides;
  app.add_option("--config", config_path, "Flat key = value configuration file");
  struct Override {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const Override kOverrides[] = {
      {"--data", "data_dir", "Dataset directory"},
      {"--delta", "delta", "Default interval pad"},
      {"--mad-c", "mad_c", "MAD consistency constant"},
      {"--mad-t", "mad_t", "MAD removal threshold"},
      {"--outlier-filter", "outlier_filter", "none, single-mad or double-mad"},
      {"--fourier-order", "fourier_order", "Trigonometric series order for projection"},
      {"--clamp-guard", "clamp_guard", "Points allowed below the cutoff line"},
      {"--host", "host", "Service address"},
      {"--port", "port", "Service port"},
      {"--pds-750", "pds_750", "Default PD list for the 750 scale"},
      {"--pds-480", "pds_480", "Default PD list for the 480 scale"},
      {"--threads", "threads", "Worker threads for prediction fan-out"},
  };
  for (const auto& o : kOverrides)
    app.add_option_function<std::string>(o.flag, [&overrides, key = o.key](const std::string& v) { overrides[key] = v; },
                                         o.help);

  // build-srt
  auto* build_cmd = app.add_subcommand("build-srt", "Exact score-ranking table from admission records");
  std::string records_path, contexts_path, out_path;
  Selector sel;
  std::optional<int> ascl, highest;
  int scale = 750;
  build_cmd->add_option("--records", records_path, "Enrollment CSV")->required();
  build_cmd->add_option("--contexts", contexts_path, "Contexts CSV");
  build_cmd->add_option("--year", sel.year, "Year");
  sel.add(build_cmd, false);
  build_cmd->add_option("--ascl", ascl, "Cutoff line when no contexts file is given");
  build_cmd->add_option("--highest", highest, "Highest score when no contexts file is given");
  build_cmd->add_option("--scale", scale, "Score scale when no contexts file is given");
  build_cmd->add_option("--out", out_path, "Output file");

  // interpolate-srt
  auto* interp_cmd = app.add_subcommand("interpolate-srt", "Dense table from sparse (score, rank) knots");
  std::string knots_path;
  interp_cmd->add_option("--knots", knots_path, "Sparse table CSV")->required();
  interp_cmd->add_option("--contexts", contexts_path, "Contexts CSV");
  interp_cmd->add_option("--year", sel.year, "Year");
  sel.add(interp_cmd, false);
  interp_cmd->add_option("--scale", scale, "Score scale when no contexts file is given");
  interp_cmd->add_option("--out", out_path, "Output file");

  // project-srt
  auto* project_cmd = app.add_subcommand("project-srt", "Project next year's table from the previous one");
  std::string prev_path;
  int from_year = 0, to_year = 0;
  std::optional<int> order;
  project_cmd->add_option("--prev", prev_path, "Previous year's table")->required();
  project_cmd->add_option("--contexts", contexts_path, "Contexts CSV")->required();
  project_cmd->add_option("--from", from_year, "Previous year")->required();
  project_cmd->add_option("--to", to_year, "Target year")->required();
  sel.add(project_cmd, true);
  project_cmd->add_option("--order", order, "Series order (overrides fourier_order)");
  project_cmd->add_option("--out", out_path, "Output file");

  // clean
  auto* clean_cmd = app.add_subcommand("clean", "Filter outlier admits and write university summaries");
  std::string method_name, removed_path;
  clean_cmd->add_option("--records", records_path, "Enrollment CSV")->required();
  clean_cmd->add_option("--contexts", contexts_path, "Contexts CSV");
  clean_cmd->add_option("--method", method_name, "none, single-mad or double-mad");
  clean_cmd->add_option("--out", out_path, "Summaries output file");
  clean_cmd->add_option("--removed", removed_path, "Removed-score report file");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict admission scores for a target year");
  PredictQuery pq;
  std::string model_name = "wpm", field_name = "admission";
  std::vector<int> base_years;
  bool no_ensemble = false, as_json = false;
  predict_cmd->add_option("--model", model_name, "BRM, WSM, WPM, AASM or AADM");
  predict_cmd->add_option("--target", pq.target_year, "Target year")->required();
  predict_cmd->add_option("--base-years", base_years, "Base years")->delimiter(',');
  sel.add(predict_cmd, true);
  predict_cmd->add_option("--field", field_name, "admission or highest");
  predict_cmd->add_flag("--no-ensemble", no_ensemble, "Use only the most recent base year");
  predict_cmd->add_flag("--json", as_json, "JSON output");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Point-difference accuracy report");
  ReportRequest rr;
  std::vector<int> pds;
  std::vector<std::string> model_names;
  std::string format = "text";
  evaluate_cmd->add_option("--target", rr.target_year, "Target year")->required();
  evaluate_cmd->add_option("--par", rr.par, "Region");
  evaluate_cmd->add_option("--base-years", base_years, "Base years")->delimiter(',');
  evaluate_cmd->add_option("--pd", pds, "Point differences")->delimiter(',');
  evaluate_cmd->add_option("--models", model_names, "Models or 'all'")->delimiter(',');
  evaluate_cmd->add_flag("--no-ensemble", no_ensemble, "Use only the most recent base year");
  evaluate_cmd->add_option("--format", format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));

  // recommend
  auto* recommend_cmd = app.add_subcommand("recommend", "Interval-based application recommendations");
  RecommendRequest rq;
  std::vector<std::string> prefer_loc, avoid_loc, prefer_major, avoid_major;
  std::optional<int> delta;
  recommend_cmd->add_option("--score", rq.prefs.gaokao_score, "Student score")->required();
  recommend_cmd->add_option("--target", rq.target_year, "Target year")->required();
  sel.add(recommend_cmd, true);
  recommend_cmd->add_option("--base-years", base_years, "Base years")->delimiter(',');
  recommend_cmd->add_option("--model", model_name, "Prediction model");
  recommend_cmd->add_option("--slots", rq.slots, "Number of categories")->check(CLI::Range(1, 26));
  recommend_cmd->add_option("--delta", delta, "Interval pad");
  recommend_cmd->add_option("--prefer-location", prefer_loc, "Preferred locations");
  recommend_cmd->add_option("--avoid-location", avoid_loc, "Disliked locations");
  recommend_cmd->add_option("--prefer-major", prefer_major, "Preferred majors");
  recommend_cmd->add_option("--avoid-major", avoid_major, "Disliked majors");
  recommend_cmd->add_flag("--no-ensemble", no_ensemble, "Use only the most recent base year");
  recommend_cmd->add_flag("--json", as_json, "JSON output");

  // lookup
  auto* lookup_cmd = app.add_subcommand("lookup", "Rank of a score or score of a rank");
  SrtQuery sq;
  lookup_cmd->add_option("--year", sel.year, "Year")->required();
  sel.add(lookup_cmd, true);
  auto* score_opt = lookup_cmd->add_option("--score", sq.score, "Score to rank");
  auto* rank_opt = lookup_cmd->add_option("--rank", sq.rank, "Rank to score");
  score_opt->excludes(rank_opt);
  lookup_cmd->add_flag("--json", as_json, "JSON output");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API over the dataset");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (lookup_cmd->parsed() && !sq.score && !sq.rank)
      throw CLI::RequiredError("--score or --rank");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    AppConfig config;
    if (!config_path.empty()) config = read_config(config_path);
    for (const auto& [key, value] : overrides) apply_config_value(config, key, value);
    validate_config(config, false);

    auto load = [&config]() {
      validate_config(config, true);
      return load_snapshot(config.data_dir, config.snapshot_options());
    };

    if (build_cmd->parsed()) {
      const ContextIndex index = read_index(contexts_path);
      const auto records = read_enrollment(records_path, contexts_path.empty() ? nullptr : &index);
      std::vector<ContextKey> keys;
      for (const auto& r : records) keys.push_back(r.key);
      const ContextKey key = single_key(keys, sel, "records");
      std::vector<int> scores;
      for (const auto& r : records)
        if (r.key == key) scores.push_back(r.score);
      CohortContext ctx;
      if (const auto it = index.find(key); it != index.end()) {
        ctx = it->second;
      } else {
        ctx.key = key;
        ctx.ascl = ascl.value_or(*std::min_element(scores.begin(), scores.end()));
        ctx.highest = highest.value_or(*std::max_element(scores.begin(), scores.end()));
        ctx.admitted_total = std::max<int>(
            1, static_cast<int>(std::count_if(scores.begin(), scores.end(), [&](int s) { return s >= ctx.ascl; })));
        ctx.scale_max = scale;
        validate_context(ctx);
      }
      const ScoreRankingTable table = build_srt(ctx, scores);
      emit(out_path, out, [&](std::ostream& o) { write_srt(o, table); });
      return 0;
    }

    if (interp_cmd->parsed()) {
      const SrtFile file = read_srt(knots_path);
      const ContextIndex index = read_index(contexts_path);
      CohortContext ctx;
      if (!contexts_path.empty()) {
        std::vector<ContextKey> keys;
        for (const auto& [k, c] : index) keys.push_back(k);
        ctx = index.at(single_key(keys, sel, "contexts"));
      } else {
        ctx.key = sel.key_or({0, "local", ExamType::li_ke, 1});
        ctx.ascl = file.entries.back().score;
        ctx.highest = file.entries.front().score;
        ctx.admitted_total = std::max(file.population.value_or(0), file.entries.back().rank);
        ctx.scale_max = scale;
        validate_context(ctx);
      }
      const ScoreRankingTable table = interpolate_sparse(ctx, file.entries);
      emit(out_path, out, [&](std::ostream& o) { write_srt(o, table); });
      return 0;
    }

    if (project_cmd->parsed()) {
      const ContextIndex index = read_index(contexts_path);
      const ContextKey prev_key = sel.key_or({from_year, "", ExamType::li_ke, 1});
      ContextKey target_key = prev_key;
      target_key.year = to_year;
      const auto prev_ctx = index.find(prev_key);
      const auto target_ctx = index.find(target_key);
      if (prev_ctx == index.end())
        throw Error(ErrorKind::unknown_context, "unknown-context", to_string(prev_key) + " is not in " + contexts_path);
      if (target_ctx == index.end())
        throw Error(ErrorKind::unknown_context, "unknown-context", to_string(target_key) + " is not in " + contexts_path);
      const ScoreRankingTable prev = table_from_file(prev_ctx->second, read_srt(prev_path));
      ProjectionConfig pc;
      pc.order = order.value_or(config.fourier_order);
      const Projection proj = project_srt(prev, target_ctx->second, pc);
      emit(out_path, out, [&](std::ostream& o) { write_srt(o, proj.table); });
      err << "projected " << to_string(target_key) << ": shift " << proj.amended.ascl_shift << ", split "
          << proj.curve.split_score << ", orders " << proj.curve.low_stats.order_used << '/'
          << proj.curve.high_stats.order_used << ", repaired " << proj.curve.repaired_points << '\n';
      return 0;
    }

    if (clean_cmd->parsed()) {
      const ContextIndex index = read_index(contexts_path);
      const auto records = read_enrollment(records_path, contexts_path.empty() ? nullptr : &index);
      SummarizeOptions so = config.snapshot_options().summarize;
      if (!method_name.empty()) so.filter = parse_filter_method(method_name);
      validate_mad_config(so.mad);
      std::map<ContextKey, std::vector<AdmissionRecord>> by_key;
      for (const auto& r : records) by_key[r.key].push_back(r);
      std::vector<UniversitySummary> summaries;
      std::ostringstream removed;
      removed << "year,par,exam_type,tier,university,score,statistic\n";
      for (const auto& [key, group] : by_key) {
        SummarizeResult res = summarize(group, so);
        summaries.insert(summaries.end(), res.summaries.begin(), res.summaries.end());
        for (const auto& [id, report] : res.reports)
          for (const auto& r : report.removed) {
            char stat[32];
            std::snprintf(stat, sizeof stat, "%.2f", r.statistic);
            removed << key.year << ',' << key.par << ',' << to_string(key.exam) << ',' << key.tier << ',' << id << ','
                    << r.score << ',' << stat << '\n';
          }
        for (const auto& d : res.diagnostics) err << "note: " << d << '\n';
      }
      emit(out_path, out, [&](std::ostream& o) { write_summaries(o, summaries); });
      if (!removed_path.empty()) emit(removed_path, out, [&](std::ostream& o) { o << removed.str(); });
      return 0;
    }

    if (predict_cmd->parsed()) {
      const DatasetSnapshot snapshot = load();
      pq.par = sel.par;
      pq.exam = parse_exam_type(sel.exam);
      pq.tier = *sel.tier;
      pq.base_years = base_years;
      pq.model = parse_model_id(model_name);
      pq.field = parse_score_field(field_name);
      pq.ensemble = !no_ensemble;
      const PredictOutcome outcome = run_predict(snapshot, config, pq);
      out << (as_json ? predict_json(outcome) : predictions_csv(outcome));
      return 0;
    }

    if (evaluate_cmd->parsed()) {
      const DatasetSnapshot snapshot = load();
      rr.base_years = base_years;
      rr.pds = pds;
      for (const auto& name : split_list(model_names)) {
        if (name == "all") {
          rr.models = all_models();
          break;
        }
        rr.models.push_back(parse_model_id(name));
      }
      rr.ensemble = !no_ensemble;
      const AccuracyReport report = run_evaluate(snapshot, config, rr);
      if (format == "json") {
        out << evaluate_json(report);
      } else if (format == "csv") {
        out << format_report_csv(report);
      } else {
        out << format_report_text(report);
        for (const auto& d : report.diagnostics) out << "note: " << d << '\n';
      }
      return 0;
    }

    if (recommend_cmd->parsed()) {
      const DatasetSnapshot snapshot = load();
      rq.par = sel.par;
      rq.prefs.exam = parse_exam_type(sel.exam);
      rq.prefs.tier = *sel.tier;
      rq.base_years = base_years;
      rq.model = parse_model_id(model_name);
      rq.delta = delta.value_or(config.delta);
      rq.ensemble = !no_ensemble;
      rq.config = config.model_config();
      for (const auto& s : split_list(prefer_loc)) rq.prefs.preferred_locations.insert(s);
      for (const auto& s : split_list(avoid_loc)) rq.prefs.disliked_locations.insert(s);
      for (const auto& s : split_list(prefer_major)) rq.prefs.preferred_majors.insert(s);
      for (const auto& s : split_list(avoid_major)) rq.prefs.disliked_majors.insert(s);
      const RecommendResult result = recommend(rq, snapshot);
      out << (as_json ? recommend_json(rq, result) : recommend_text(rq, result));
      return 0;
    }

    if (lookup_cmd->parsed()) {
      const DatasetSnapshot snapshot = load();
      sq.key = sel.key_or({});
      if (as_json) {
        out << srt_json(snapshot, sq);
        return 0;
      }
      const Cohort& cohort = snapshot.at(sq.key);
      if (!cohort.table)
        throw Error(ErrorKind::missing_input, "missing-srt", "no score-ranking table for " + to_string(sq.key));
      const Lookup r = sq.score ? cohort.table->rank_of(*sq.score) : cohort.table->score_of(*sq.rank);
      const int score = sq.score ? *sq.score : r.value;
      const int rank = sq.score ? r.value : *sq.rank;
      out << "score,rank,flags\n" << score << ',' << rank << ',' << join(r.flags.names(), ';') << '\n';
      return 0;
    }

    if (serve_cmd->parsed()) {
      const DatasetSnapshot snapshot = load();
      for (const auto& d : snapshot.diagnostics()) err << "note: " << d << '\n';
      const Api api(snapshot, config);
      Service service(api);
      const int port = service.bind(config.host, config.port);
      if (port < 0) throw Error(ErrorKind::invalid_argument, "bind", "cannot listen on " + config.host + ":" + std::to_string(config.port));
      err << "listening on http://" << config.host << ':' << port << '\n';
      service.run();
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace rankcast
