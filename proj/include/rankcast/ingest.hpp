#pragma once
// On-disk formats and the immutable dataset snapshot.
//
// Every file is UTF-8 CSV with a mandatory header row:
//   contexts:   year,par,exam_type,tier,ascl,highest,admitted_total,scale_max
//   enrollment: year,par,exam_type,tier,university,major,score
//   summaries:  year,par,exam_type,tier,university,admission_score,highest_score,enrollment,location
//   srt:        score,rank   (optional leading "# key=value" metadata lines)
//
// A data directory holds contexts.csv, optional enrollment.csv and
// summaries.csv, and an optional srt/ directory with one table per cohort
// named <par>_<year>_<like|wenke>_<tier>.csv.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rankcast/domain.hpp"
#include "rankcast/outliers.hpp"
#include "rankcast/srt.hpp"

namespace rankcast {

using ContextIndex = std::map<ContextKey, CohortContext>;

std::vector<CohortContext> parse_contexts(std::istream& in, const std::string& source);
// With `declared`, rows for undeclared contexts and scores above the
// context's highest score are rejected.
std::vector<AdmissionRecord> parse_enrollment(std::istream& in, const std::string& source,
                                              const ContextIndex* declared = nullptr);
std::vector<UniversitySummary> parse_summaries(std::istream& in, const std::string& source,
                                               const ContextIndex* declared = nullptr);

struct SrtFile {
  std::vector<SrtEntry> entries;  // descending score
  std::optional<Provenance> provenance;
  std::optional<int> population;
};

SrtFile parse_srt(std::istream& in, const std::string& source);
// Dense files become tables directly; sparse ones are interpolated.
ScoreRankingTable table_from_file(const CohortContext& context, const SrtFile& file);

std::vector<CohortContext> read_contexts(const std::filesystem::path& path);
std::vector<AdmissionRecord> read_enrollment(const std::filesystem::path& path,
                                             const ContextIndex* declared = nullptr);
std::vector<UniversitySummary> read_summaries(const std::filesystem::path& path,
                                              const ContextIndex* declared = nullptr);
SrtFile read_srt(const std::filesystem::path& path);

void write_contexts(std::ostream& out, const std::vector<CohortContext>& contexts);
void write_enrollment(std::ostream& out, const std::vector<AdmissionRecord>& records);
void write_summaries(std::ostream& out, const std::vector<UniversitySummary>& summaries);
void write_srt(std::ostream& out, const ScoreRankingTable& table);

std::string srt_file_name(const ContextKey& key);

struct SummarizeOptions {
  FilterMethod filter = FilterMethod::double_mad;
  MadConfig mad;
};

struct SummarizeResult {
  std::vector<UniversitySummary> summaries;  // sorted by university id
  std::map<std::string, FilterReport> reports;
  std::vector<std::string> diagnostics;
};

// Aggregates one cohort's records into per-university summaries, filtering
// outliers per university first. Universities with too few scores for the
// chosen test are aggregated unfiltered and reported.
SummarizeResult summarize(std::span<const AdmissionRecord> records, const SummarizeOptions& options = {});

struct Cohort {
  CohortContext context;
  std::vector<AdmissionRecord> records;
  std::vector<UniversitySummary> summaries;  // sorted by university id
  std::optional<ScoreRankingTable> table;
};

class DatasetSnapshot {
 public:
  const std::map<ContextKey, Cohort>& cohorts() const { return cohorts_; }
  const Cohort* find(const ContextKey& key) const;
  // Throws Error(unknown_context) when absent.
  const Cohort& at(const ContextKey& key) const;
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }
  std::vector<std::string> pars() const;

 private:
  friend class SnapshotBuilder;
  std::map<ContextKey, Cohort> cohorts_;
  std::vector<std::string> diagnostics_;
};

struct SnapshotOptions {
  SummarizeOptions summarize;
};

class SnapshotBuilder {
 public:
  void add_context(const CohortContext& context);
  void add_records(std::vector<AdmissionRecord> records);
  void add_summaries(std::vector<UniversitySummary> summaries);
  void add_table(ScoreRankingTable table);

  const ContextIndex& contexts() const { return contexts_; }
  DatasetSnapshot build(const SnapshotOptions& options = {}) const;

 private:
  const CohortContext& require(const ContextKey& key) const;

  ContextIndex contexts_;
  std::vector<AdmissionRecord> records_;
  std::vector<UniversitySummary> summaries_;
  std::map<ContextKey, ScoreRankingTable> tables_;
};

DatasetSnapshot load_snapshot(const std::filesystem::path& dir, const SnapshotOptions& options = {});

}  // namespace rankcast
