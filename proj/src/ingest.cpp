#include "rankcast/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace rankcast {

namespace {

const std::vector<std::string> kContextColumns = {"year", "par", "exam_type", "tier",
                                                  "ascl", "highest", "admitted_total", "scale_max"};
const std::vector<std::string> kEnrollmentColumns = {"year", "par", "exam_type", "tier",
                                                     "university", "major", "score"};
const std::vector<std::string> kSummaryColumns = {"year", "par", "exam_type", "tier", "university",
                                                  "admission_score", "highest_score", "enrollment",
                                                  "location"};
const std::vector<std::string> kSrtColumns = {"score", "rank"};

std::string trim(std::string_view text) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return std::string(text);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

// Line-oriented CSV reader that tracks line numbers for diagnostics.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Consumes metadata comments and the header; throws if the header differs.
  void expect_header(const std::vector<std::string>& columns) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (t.front() == '#') {
        comments_.push_back(trim(std::string_view(t).substr(1)));
        continue;
      }
      auto fields = split_row(t);
      for (auto& f : fields) f = normalize_id(f);
      if (fields != columns) {
        std::string expected;
        for (const auto& c : columns) expected += (expected.empty() ? "" : ",") + c;
        fail(ErrorKind::parse, "bad-header", "expected header '" + expected + "'");
      }
      return;
    }
    fail(ErrorKind::empty_dataset, "missing-header", "file is empty");
  }

  bool next(std::vector<std::string>& fields, std::size_t expected) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const std::string t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      fields = split_row(t);
      if (fields.size() != expected)
        fail(ErrorKind::parse, "malformed-row",
             "expected " + std::to_string(expected) + " fields, found " + std::to_string(fields.size()));
      return true;
    }
    return false;
  }

  int to_int(const std::string& text, const char* column) const {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
      fail(ErrorKind::parse, "malformed-row", std::string(column) + " '" + text + "' is not an integer");
    return value;
  }

  ContextKey key(const std::vector<std::string>& f) const {
    ContextKey key;
    key.year = to_int(f[0], "year");
    key.par = normalize_id(f[1]);
    if (key.par.empty()) fail(ErrorKind::parse, "malformed-row", "par is empty");
    try {
      key.exam = parse_exam_type(f[2]);
    } catch (const Error& e) {
      fail(ErrorKind::parse, e.tag(), "exam_type '" + f[2] + "' is not LiKe or WenKe");
    }
    key.tier = to_int(f[3], "tier");
    if (key.tier < 1 || key.tier > 3)
      fail(ErrorKind::parse, "tier-out-of-range", "tier " + f[3] + " is not 1, 2 or 3");
    return key;
  }

  const CohortContext* lookup(const ContextKey& key, const ContextIndex* declared) const {
    if (declared == nullptr) return nullptr;
    const auto it = declared->find(key);
    if (it == declared->end())
      fail(ErrorKind::unknown_context, "unknown-context", to_string(key) + " is not a declared context");
    return &it->second;
  }

  [[noreturn]] void fail(ErrorKind kind, const std::string& tag, const std::string& what) const {
    throw Error(kind, tag, where() + ": " + what);
  }

  std::string where() const { return source_ + ":" + std::to_string(line_no_); }
  const std::vector<std::string>& comments() const { return comments_; }

 private:
  std::istream& in_;
  std::string source_;
  int line_no_ = 0;
  std::vector<std::string> comments_;
};

void write_key(std::ostream& out, const ContextKey& key) {
  out << key.year << ',' << key.par << ',' << to_string(key.exam) << ',' << key.tier;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::not_found, "file-not-found", path.string() + " cannot be opened");
  return in;
}

}  // namespace

std::vector<CohortContext> parse_contexts(std::istream& in, const std::string& source) {
  CsvReader reader(in, source);
  reader.expect_header(kContextColumns);
  std::vector<CohortContext> out;
  std::set<ContextKey> seen;
  std::vector<std::string> f;
  while (reader.next(f, kContextColumns.size())) {
    CohortContext ctx;
    ctx.key = reader.key(f);
    ctx.ascl = reader.to_int(f[4], "ascl");
    ctx.highest = reader.to_int(f[5], "highest");
    ctx.admitted_total = reader.to_int(f[6], "admitted_total");
    ctx.scale_max = reader.to_int(f[7], "scale_max");
    try {
      validate_context(ctx);
    } catch (const Error& e) {
      reader.fail(ErrorKind::invalid_argument, e.tag(), e.message());
    }
    if (!seen.insert(ctx.key).second)
      reader.fail(ErrorKind::duplicate, "duplicate-context", to_string(ctx.key) + " declared twice");
    out.push_back(ctx);
  }
  if (out.empty()) reader.fail(ErrorKind::empty_dataset, "empty-dataset", "no data rows");
  return out;
}

std::vector<AdmissionRecord> parse_enrollment(std::istream& in, const std::string& source,
                                              const ContextIndex* declared) {
  CsvReader reader(in, source);
  reader.expect_header(kEnrollmentColumns);
  std::vector<AdmissionRecord> out;
  std::vector<std::string> f;
  while (reader.next(f, kEnrollmentColumns.size())) {
    AdmissionRecord r;
    r.key = reader.key(f);
    r.university = normalize_id(f[4]);
    r.major = normalize_id(f[5]);
    r.score = reader.to_int(f[6], "score");
    if (r.university.empty()) reader.fail(ErrorKind::parse, "malformed-row", "university is empty");
    if (r.score < 0) reader.fail(ErrorKind::parse, "malformed-row", "score is negative");
    if (const CohortContext* ctx = reader.lookup(r.key, declared); ctx && r.score > ctx->highest)
      reader.fail(ErrorKind::invalid_argument, "score>highest",
                  "score " + std::to_string(r.score) + " exceeds highest " + std::to_string(ctx->highest));
    out.push_back(std::move(r));
  }
  if (out.empty()) reader.fail(ErrorKind::empty_dataset, "empty-dataset", "no data rows");
  return out;
}

std::vector<UniversitySummary> parse_summaries(std::istream& in, const std::string& source,
                                               const ContextIndex* declared) {
  CsvReader reader(in, source);
  reader.expect_header(kSummaryColumns);
  std::vector<UniversitySummary> out;
  std::set<std::pair<ContextKey, std::string>> seen;
  std::vector<std::string> f;
  while (reader.next(f, kSummaryColumns.size())) {
    UniversitySummary s;
    s.key = reader.key(f);
    s.university = normalize_id(f[4]);
    s.admission_score = reader.to_int(f[5], "admission_score");
    s.highest_score = reader.to_int(f[6], "highest_score");
    s.enrollment = reader.to_int(f[7], "enrollment");
    s.location = normalize_id(f[8]);
    s.admission_tier = s.key.tier;
    const CohortContext* ctx = reader.lookup(s.key, declared);
    try {
      validate_summary(s, ctx);
    } catch (const Error& e) {
      reader.fail(e.kind(), e.tag(), e.message());
    }
    if (!seen.emplace(s.key, s.university).second)
      reader.fail(ErrorKind::duplicate, "duplicate", s.university + " repeats in " + to_string(s.key));
    out.push_back(std::move(s));
  }
  if (out.empty()) reader.fail(ErrorKind::empty_dataset, "empty-dataset", "no data rows");
  return out;
}

SrtFile parse_srt(std::istream& in, const std::string& source) {
  CsvReader reader(in, source);
  reader.expect_header(kSrtColumns);
  SrtFile file;
  for (const std::string& c : reader.comments()) {
    const auto eq = c.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = normalize_id(c.substr(0, eq));
    const std::string value = trim(c.substr(eq + 1));
    if (key == "provenance") file.provenance = parse_provenance(value);
    if (key == "population") file.population = reader.to_int(value, "population");
  }
  std::vector<std::string> f;
  while (reader.next(f, kSrtColumns.size())) {
    const SrtEntry e{reader.to_int(f[0], "score"), reader.to_int(f[1], "rank")};
    if (e.rank < 1) reader.fail(ErrorKind::parse, "rank<1", "rank must be at least 1");
    if (!file.entries.empty()) {
      if (e.score >= file.entries.back().score)
        reader.fail(ErrorKind::ordering, "score-not-decreasing", "scores must strictly decrease");
      if (e.rank < file.entries.back().rank)
        reader.fail(ErrorKind::ordering, "rank-decreasing", "ranks must not decrease");
    }
    file.entries.push_back(e);
  }
  if (file.entries.empty()) reader.fail(ErrorKind::empty_dataset, "empty-dataset", "no data rows");
  return file;
}

ScoreRankingTable table_from_file(const CohortContext& context, const SrtFile& file) {
  const auto& e = file.entries;
  const bool dense = static_cast<int>(e.size()) == e.front().score - e.back().score + 1;
  if (!dense) return interpolate_sparse(context, e);
  std::vector<int> ranks;
  ranks.reserve(e.size());
  for (auto it = e.rbegin(); it != e.rend(); ++it) ranks.push_back(it->rank);
  const int population = file.population.value_or(std::max(context.admitted_total, ranks.front()));
  return ScoreRankingTable::from_dense(context, file.provenance.value_or(Provenance::exact),
                                       e.back().score, std::move(ranks), population);
}

std::vector<CohortContext> read_contexts(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_contexts(in, path.string());
}

std::vector<AdmissionRecord> read_enrollment(const std::filesystem::path& path, const ContextIndex* declared) {
  auto in = open_input(path);
  return parse_enrollment(in, path.string(), declared);
}

std::vector<UniversitySummary> read_summaries(const std::filesystem::path& path, const ContextIndex* declared) {
  auto in = open_input(path);
  return parse_summaries(in, path.string(), declared);
}

SrtFile read_srt(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_srt(in, path.string());
}

void write_contexts(std::ostream& out, const std::vector<CohortContext>& contexts) {
  out << "year,par,exam_type,tier,ascl,highest,admitted_total,scale_max\n";
  for (const auto& c : contexts) {
    write_key(out, c.key);
    out << ',' << c.ascl << ',' << c.highest << ',' << c.admitted_total << ',' << c.scale_max << '\n';
  }
}

void write_enrollment(std::ostream& out, const std::vector<AdmissionRecord>& records) {
  out << "year,par,exam_type,tier,university,major,score\n";
  for (const auto& r : records) {
    write_key(out, r.key);
    out << ',' << r.university << ',' << r.major << ',' << r.score << '\n';
  }
}

void write_summaries(std::ostream& out, const std::vector<UniversitySummary>& summaries) {
  out << "year,par,exam_type,tier,university,admission_score,highest_score,enrollment,location\n";
  for (const auto& s : summaries) {
    write_key(out, s.key);
    out << ',' << s.university << ',' << s.admission_score << ',' << s.highest_score << ','
        << s.enrollment << ',' << s.location << '\n';
  }
}

void write_srt(std::ostream& out, const ScoreRankingTable& table) {
  out << "# provenance=" << to_string(table.provenance()) << '\n';
  out << "# population=" << table.population() << '\n';
  out << "score,rank\n";
  for (const auto& e : table.entries()) out << e.score << ',' << e.rank << '\n';
}

std::string srt_file_name(const ContextKey& key) {
  return key.par + "_" + std::to_string(key.year) + "_" + (key.exam == ExamType::li_ke ? "like" : "wenke") +
         "_" + std::to_string(key.tier) + ".csv";
}

// ---------------------------------------------------------------------------

SummarizeResult summarize(std::span<const AdmissionRecord> records, const SummarizeOptions& options) {
  SummarizeResult result;
  if (records.empty()) return result;
  const ContextKey& key = records.front().key;

  std::map<std::string, std::vector<int>> scores;
  std::map<std::string, std::set<std::string>> majors;
  for (const auto& r : records) {
    if (r.key != key)
      throw Error(ErrorKind::unknown_context, "context-mismatch",
                  "records mix " + to_string(key) + " and " + to_string(r.key));
    const std::string id = normalize_id(r.university);
    scores[id].push_back(r.score);
    if (!r.major.empty()) majors[id].insert(r.major);
  }

  const std::size_t min_count = options.filter == FilterMethod::single_mad   ? 3
                                : options.filter == FilterMethod::double_mad ? 5
                                                                             : 0;
  for (auto& [id, values] : scores) {
    FilterMethod method = options.filter;
    if (values.size() < min_count) {
      result.diagnostics.push_back(to_string(key) + "/" + id + ": " + std::to_string(values.size()) +
                                   " scores, too few for " + std::string(to_string(method)) + "; kept unfiltered");
      method = FilterMethod::none;
    }
    FilterReport report = apply_filter(method, values, options.mad);
    if (report.zero_mad)
      result.diagnostics.push_back(to_string(key) + "/" + id + ": zero MAD, scores kept");
    if (report.kept.empty()) {
      result.diagnostics.push_back(to_string(key) + "/" + id + ": no retained scores; excluded");
      result.reports.emplace(id, std::move(report));
      continue;
    }
    UniversitySummary s;
    s.key = key;
    s.university = id;
    s.admission_score = report.kept.front();
    s.highest_score = report.kept.back();
    s.enrollment = static_cast<int>(report.kept.size());
    s.majors = majors[id];
    s.admission_tier = key.tier;
    result.summaries.push_back(std::move(s));
    result.reports.emplace(id, std::move(report));
  }
  return result;
}

// ---------------------------------------------------------------------------

const Cohort* DatasetSnapshot::find(const ContextKey& key) const {
  const auto it = cohorts_.find(key);
  return it == cohorts_.end() ? nullptr : &it->second;
}

const Cohort& DatasetSnapshot::at(const ContextKey& key) const {
  const Cohort* c = find(key);
  if (c == nullptr) throw Error(ErrorKind::unknown_context, "unknown-context", to_string(key) + " is not in the dataset");
  return *c;
}

std::vector<std::string> DatasetSnapshot::pars() const {
  std::set<std::string> out;
  for (const auto& [key, cohort] : cohorts_) out.insert(key.par);
  return {out.begin(), out.end()};
}

const CohortContext& SnapshotBuilder::require(const ContextKey& key) const {
  const auto it = contexts_.find(key);
  if (it == contexts_.end())
    throw Error(ErrorKind::unknown_context, "unknown-context", to_string(key) + " is not a declared context");
  return it->second;
}

void SnapshotBuilder::add_context(const CohortContext& context) {
  validate_context(context);
  if (!contexts_.emplace(context.key, context).second)
    throw Error(ErrorKind::duplicate, "duplicate-context", to_string(context.key) + " declared twice");
}

void SnapshotBuilder::add_records(std::vector<AdmissionRecord> records) {
  for (auto& r : records) {
    const CohortContext& ctx = require(r.key);
    if (r.score > ctx.highest)
      throw Error(ErrorKind::invalid_argument, "score>highest",
                  to_string(r.key) + "/" + r.university + ": score " + std::to_string(r.score));
    records_.push_back(std::move(r));
  }
}

void SnapshotBuilder::add_summaries(std::vector<UniversitySummary> summaries) {
  for (auto& s : summaries) {
    validate_summary(s, &require(s.key));
    const bool duplicate = std::any_of(summaries_.begin(), summaries_.end(), [&](const UniversitySummary& o) {
      return o.key == s.key && o.university == s.university;
    });
    if (duplicate)
      throw Error(ErrorKind::duplicate, "duplicate", s.university + " repeats in " + to_string(s.key));
    summaries_.push_back(std::move(s));
  }
}

void SnapshotBuilder::add_table(ScoreRankingTable table) {
  const ContextKey key = table.context().key;
  require(key);
  if (!tables_.emplace(key, std::move(table)).second)
    throw Error(ErrorKind::duplicate, "duplicate-table", "two tables for " + to_string(key));
}

DatasetSnapshot SnapshotBuilder::build(const SnapshotOptions& options) const {
  DatasetSnapshot snap;
  for (const auto& [key, ctx] : contexts_) snap.cohorts_[key].context = ctx;
  for (const auto& r : records_) snap.cohorts_[r.key].records.push_back(r);

  std::map<ContextKey, std::vector<UniversitySummary>> file_summaries;
  for (const auto& s : summaries_) file_summaries[s.key].push_back(s);

  for (auto& [key, cohort] : snap.cohorts_) {
    const std::string where = to_string(key);
    auto& from_file = file_summaries[key];
    if (cohort.records.empty()) {
      cohort.summaries = from_file;
    } else {
      SummarizeResult derived = summarize(cohort.records, options.summarize);
      for (auto& d : derived.diagnostics) snap.diagnostics_.push_back(std::move(d));
      std::map<std::string, UniversitySummary> merged;
      for (auto& s : derived.summaries) merged.emplace(s.university, std::move(s));
      for (const auto& f : from_file) {
        auto it = merged.find(f.university);
        if (it == merged.end()) {
          merged.emplace(f.university, f);
          continue;
        }
        UniversitySummary& d = it->second;
        if (d.admission_score != f.admission_score || d.highest_score != f.highest_score ||
            d.enrollment != f.enrollment)
          snap.diagnostics_.push_back(where + "/" + f.university +
                                      ": summaries file conflicts with enrollment records; records used");
        if (d.location.empty()) d.location = f.location;
      }
      cohort.summaries.clear();
      for (auto& [id, s] : merged) cohort.summaries.push_back(std::move(s));
    }
    std::sort(cohort.summaries.begin(), cohort.summaries.end(),
              [](const UniversitySummary& a, const UniversitySummary& b) { return a.university < b.university; });
    for (const auto& s : cohort.summaries) validate_summary(s, &cohort.context);

    if (auto it = tables_.find(key); it != tables_.end()) {
      cohort.table = it->second;
    } else if (!cohort.records.empty()) {
      try {
        cohort.table = build_srt(cohort.context, cohort.records);
      } catch (const Error& e) {
        snap.diagnostics_.push_back(where + ": no table built from records (" + e.what() + ")");
      }
    }
  }
  return snap;
}

DatasetSnapshot load_snapshot(const std::filesystem::path& dir, const SnapshotOptions& options) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::not_found, "data-dir-missing", dir.string() + " is not a directory");
  SnapshotBuilder builder;
  for (const auto& ctx : read_contexts(dir / "contexts.csv")) builder.add_context(ctx);
  if (fs::exists(dir / "enrollment.csv")) builder.add_records(read_enrollment(dir / "enrollment.csv", &builder.contexts()));
  if (fs::exists(dir / "summaries.csv")) builder.add_summaries(read_summaries(dir / "summaries.csv", &builder.contexts()));

  if (fs::is_directory(dir / "srt")) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir / "srt"))
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
      const std::string stem = path.stem().string();
      std::vector<std::string> parts;
      std::stringstream ss(stem);
      for (std::string part; std::getline(ss, part, '_');) parts.push_back(part);
      if (parts.size() < 4)
        throw Error(ErrorKind::parse, "bad-table-name", path.string() + " is not <par>_<year>_<exam>_<tier>.csv");
      ContextKey key;
      try {
        const std::size_t n = parts.size();
        key.tier = std::stoi(parts[n - 1]);
        key.exam = parse_exam_type(parts[n - 2]);
        key.year = std::stoi(parts[n - 3]);
        std::string par = parts[0];
        for (std::size_t i = 1; i + 3 < n; ++i) par += "_" + parts[i];
        key.par = normalize_id(par);
      } catch (const std::exception&) {
        throw Error(ErrorKind::parse, "bad-table-name", path.string() + " is not <par>_<year>_<exam>_<tier>.csv");
      }
      const auto ctx = builder.contexts().find(key);
      if (ctx == builder.contexts().end())
        throw Error(ErrorKind::unknown_context, "unknown-context", path.string() + ": " + to_string(key) + " is not declared");
      builder.add_table(table_from_file(ctx->second, read_srt(path)));
    }
  }
  return builder.build(options);
}

}  // namespace rankcast
