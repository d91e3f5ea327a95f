#pragma once
// Configuration, the JSON request/response layer shared by the CLI and the
// HTTP service, and the service entry point.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rankcast/evaluate.hpp"
#include "rankcast/ingest.hpp"
#include "rankcast/outliers.hpp"
#include "rankcast/recommend.hpp"

namespace rankcast {

struct AppConfig {
  std::filesystem::path data_dir;
  int delta = 5;
  double mad_c = 0.6745;
  double mad_t = 2.24;
  FilterMethod outlier_filter = FilterMethod::double_mad;
  int fourier_order = 3;
  int clamp_guard = 10;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<int> pds_750 = {5, 6, 7};
  std::vector<int> pds_480 = {3, 4, 5};
  int threads = 1;

  std::vector<int> pds_for(int scale_max) const { return scale_max == 480 ? pds_480 : pds_750; }
  SnapshotOptions snapshot_options() const;
  ModelConfig model_config() const;
};

// Sets one key from its text value. Unknown keys and bad values throw.
void apply_config_value(AppConfig& config, const std::string& key, const std::string& value);
// Flat `key = value` lines; `#` starts a comment.
AppConfig parse_config(std::istream& in, const std::string& source, AppConfig base = {});
AppConfig read_config(const std::filesystem::path& path, AppConfig base = {});
// Every numeric parameter positive; data_dir must exist when `require_data` is set.
void validate_config(const AppConfig& config, bool require_data);

// Typed queries shared by the CLI and the service. Both render the same JSON
// documents, so equivalent queries produce identical bytes.
struct SrtQuery {
  ContextKey key;
  std::optional<int> score;
  std::optional<int> rank;
};

struct PredictQuery {
  std::string par;
  ExamType exam = ExamType::li_ke;
  int tier = 1;
  int target_year = 0;
  std::vector<int> base_years;
  ModelId model = ModelId::wpm;
  ScoreField field = ScoreField::admission;
  bool ensemble = true;
};

struct PredictOutcome {
  ContextKey target;
  ModelId model = ModelId::wpm;
  ScoreField field = ScoreField::admission;
  std::vector<int> base_years;
  std::vector<Prediction> predictions;
};

std::string_view to_string(ScoreField field);
ScoreField parse_score_field(std::string_view text);

PredictOutcome run_predict(const DatasetSnapshot& snapshot, const AppConfig& config, const PredictQuery& query);
// Fills in pds from the configuration when the request leaves them empty.
AccuracyReport run_evaluate(const DatasetSnapshot& snapshot, const AppConfig& config, ReportRequest request);

std::string srt_json(const DatasetSnapshot& snapshot, const SrtQuery& query);
std::string predict_json(const PredictOutcome& outcome);
std::string recommend_json(const RecommendRequest& request, const RecommendResult& result);
std::string evaluate_json(const AccuracyReport& report);
std::string error_json(const Error& error);

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON document followed by a newline
};

// Read-only request handlers over an immutable snapshot. Safe to call from
// several threads at once.
class Api {
 public:
  Api(const DatasetSnapshot& snapshot, AppConfig config);

  ApiResponse handle(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& query, const std::string& body) const;

  ApiResponse health() const;
  ApiResponse datasets() const;
  ApiResponse srt(const std::string& par, const std::string& year, const std::string& exam, const std::string& tier,
                  const std::map<std::string, std::string>& query) const;
  ApiResponse predict(const std::string& body) const;
  ApiResponse recommend(const std::string& body) const;
  ApiResponse evaluate(const std::string& body) const;

  const DatasetSnapshot& snapshot() const { return snapshot_; }
  const AppConfig& config() const { return config_; }

 private:
  const DatasetSnapshot& snapshot_;
  AppConfig config_;
};

// HTTP status for a library error kind.
int status_for(ErrorKind kind);

// HTTP front end for an Api. Requests are served on a worker pool.
class Service {
 public:
  explicit Service(const Api& api);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called from another thread.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// bind + run. Returns false if the port cannot be bound.
bool serve(const Api& api, const std::string& host, int port);

}  // namespace rankcast
