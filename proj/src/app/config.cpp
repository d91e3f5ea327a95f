#include <charconv>
#include <fstream>
#include <sstream>

#include "rankcast/app.hpp"

namespace rankcast {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

int to_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error(ErrorKind::parse, "bad-value", key + ": expected an integer, got '" + value + "'");
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  double out = 0.0;
  in >> out;
  if (in.fail() || !in.eof())
    throw Error(ErrorKind::parse, "bad-value", key + ": expected a number, got '" + value + "'");
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_int(key, trim(item)));
  if (out.empty()) throw Error(ErrorKind::parse, "bad-value", key + ": empty list");
  return out;
}

}  // namespace

SnapshotOptions AppConfig::snapshot_options() const {
  SnapshotOptions opts;
  opts.summarize.filter = outlier_filter;
  opts.summarize.mad.consistency = mad_c;
  opts.summarize.mad.threshold = mad_t;
  return opts;
}

ModelConfig AppConfig::model_config() const {
  ModelConfig cfg;
  cfg.clamp_guard = clamp_guard;
  cfg.threads = threads;
  return cfg;
}

void apply_config_value(AppConfig& config, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "data_dir") config.data_dir = value;
  else if (key == "delta") config.delta = to_int(key, value);
  else if (key == "mad_c") config.mad_c = to_double(key, value);
  else if (key == "mad_t") config.mad_t = to_double(key, value);
  else if (key == "outlier_filter") config.outlier_filter = parse_filter_method(value);
  else if (key == "fourier_order") config.fourier_order = to_int(key, value);
  else if (key == "clamp_guard") config.clamp_guard = to_int(key, value);
  else if (key == "host") config.host = value;
  else if (key == "port") config.port = to_int(key, value);
  else if (key == "pds_750") config.pds_750 = to_int_list(key, value);
  else if (key == "pds_480") config.pds_480 = to_int_list(key, value);
  else if (key == "threads") config.threads = to_int(key, value);
  else throw Error(ErrorKind::invalid_argument, "unknown-key", "unknown configuration key '" + key + "'");
}

AppConfig parse_config(std::istream& in, const std::string& source, AppConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::parse, "malformed-row", source + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      apply_config_value(base, trim(text.substr(0, eq)), text.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.kind(), e.tag(), source + ":" + std::to_string(line_no) + ": " + e.message());
    }
  }
  return base;
}

AppConfig read_config(const std::filesystem::path& path, AppConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_input, "missing-file", "cannot open " + path.string());
  return parse_config(in, path.string(), std::move(base));
}

void validate_config(const AppConfig& config, bool require_data) {
  auto positive = [](const char* key, double v) {
    if (!(v > 0)) throw Error(ErrorKind::invalid_argument, std::string(key) + "<=0", std::string(key) + " must be positive");
  };
  positive("delta", config.delta);
  positive("mad_c", config.mad_c);
  positive("mad_t", config.mad_t);
  positive("fourier_order", config.fourier_order);
  positive("clamp_guard", config.clamp_guard);
  positive("threads", config.threads);
  if (config.port < 1 || config.port > 65535)
    throw Error(ErrorKind::invalid_argument, "port-range", "port must be in 1..65535");
  for (const auto* list : {&config.pds_750, &config.pds_480})
    for (int pd : *list) positive("pd", pd);
  if (require_data) {
    if (config.data_dir.empty()) throw Error(ErrorKind::missing_input, "data-dir", "no data directory configured");
    if (!std::filesystem::is_directory(config.data_dir))
      throw Error(ErrorKind::missing_input, "data-dir", "data directory " + config.data_dir.string() + " does not exist");
  }
}

}  // namespace rankcast
