#include "rankcast/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "rankcast/parallel.hpp"
#include "rankcast/recommend.hpp"

namespace rankcast {

double round_percentage(int numerator, int denominator) {
  if (denominator < 1) throw Error(ErrorKind::invalid_argument, "denominator<1", "percentage of nothing");
  return static_cast<double>(round_div(1000LL * numerator, denominator)) / 10.0;
}

std::vector<int> default_pds(int scale_max) {
  if (scale_max == 480) return {3, 4, 5};
  return {5, 6, 7};
}

AccuracyCell pd_accuracy(std::span<const Prediction> predictions, const std::map<std::string, int>& truths, int pd) {
  if (pd < 0) throw Error(ErrorKind::invalid_argument, "pd<0", "point difference must be nonnegative");
  if (predictions.empty()) throw Error(ErrorKind::empty_dataset, "empty-intersection", "no predictions");
  AccuracyCell cell;
  cell.model = predictions.front().model;
  cell.pd = pd;
  for (const auto& p : predictions) {
    const auto it = truths.find(p.university);
    if (it == truths.end()) {
      ++cell.missing_truth;
      continue;
    }
    ++cell.denominator;
    if (std::abs(p.predicted_score - it->second) <= pd) ++cell.numerator;
  }
  if (cell.denominator == 0)
    throw Error(ErrorKind::empty_dataset, "empty-intersection", "no prediction has a truth value");
  cell.percentage = round_percentage(cell.numerator, cell.denominator);
  return cell;
}

const AccuracyCell* AccuracyReport::find(ModelId model, int pd, const std::string& group) const {
  for (const auto& c : cells)
    if (c.model == model && c.pd == pd && c.group == group) return &c;
  return nullptr;
}

namespace {

struct Group {
  std::string label;
  const Cohort* target = nullptr;
  std::vector<const Cohort*> bases;
  std::map<std::string, int> truths;
};

struct Job {
  std::size_t group = 0;
  ModelId model = ModelId::brm;
  std::vector<Prediction> predictions;
  std::string error;
};

}  // namespace

AccuracyReport accuracy_report(const DatasetSnapshot& snapshot, const ReportRequest& request) {
  AccuracyReport report;
  report.models = request.models.empty() ? all_models() : request.models;

  std::string par = normalize_id(request.par);
  if (par.empty()) {
    const auto pars = snapshot.pars();
    if (pars.size() != 1)
      throw Error(ErrorKind::invalid_argument, "par-ambiguous", "dataset holds several regions; choose one");
    par = pars.front();
  }

  std::vector<std::pair<ExamType, int>> shapes = {
      {ExamType::li_ke, 1}, {ExamType::wen_ke, 1}, {ExamType::li_ke, 2}, {ExamType::wen_ke, 2}};
  for (ExamType exam : {ExamType::li_ke, ExamType::wen_ke})
    if (snapshot.find({request.target_year, par, exam, 3}) != nullptr) shapes.emplace_back(exam, 3);

  std::vector<Group> groups;
  int scale = 0;
  for (const auto& [exam, tier] : shapes) {
    Group g;
    g.label = group_label(exam, tier);
    report.groups.push_back(g.label);
    const ContextKey key{request.target_year, par, exam, tier};
    g.target = snapshot.find(key);
    if (g.target == nullptr) {
      report.diagnostics.push_back(g.label + ": no target cohort " + to_string(key) + "; cells omitted");
      continue;
    }
    for (const auto& u : g.target->summaries) g.truths[u.university] = u.admission_score;
    if (g.truths.empty()) {
      report.diagnostics.push_back(g.label + ": target cohort has no admission scores; cells omitted");
      continue;
    }
    try {
      for (int y : resolve_base_years(snapshot, key, request.base_years)) {
        ContextKey k = key;
        k.year = y;
        g.bases.push_back(&snapshot.at(k));
      }
    } catch (const Error& e) {
      report.diagnostics.push_back(g.label + ": " + e.what() + "; cells omitted");
      continue;
    }
    if (scale == 0) scale = g.target->context.scale_max;
    groups.push_back(std::move(g));
  }
  report.pds = request.pds.empty() ? default_pds(scale == 0 ? 750 : scale) : request.pds;

  std::vector<Job> jobs;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (ModelId m : report.models) jobs.push_back({g, m, {}, {}});

  ModelConfig config = request.config;
  config.threads = 1;
  detail::parallel_for(jobs.size(), request.threads, [&](std::size_t i) {
    Job& job = jobs[i];
    const Group& g = groups[job.group];
    PredictRequest pr;
    pr.model = job.model;
    pr.target = {&g.target->context, g.target->table ? &*g.target->table : nullptr, {}};
    for (const Cohort* b : g.bases) pr.bases.push_back({&b->context, b->table ? &*b->table : nullptr, b->summaries});
    pr.ensemble = request.ensemble;
    pr.config = config;
    try {
      job.predictions = predict(pr);
    } catch (const Error& e) {
      job.error = e.what();
    }
  });

  for (const Job& job : jobs)
    if (!job.error.empty())
      report.diagnostics.push_back(groups[job.group].label + "/" + std::string(to_string(job.model)) + ": " +
                                   job.error + "; cells omitted");

  for (int pd : report.pds) {
    for (ModelId m : report.models) {
      for (const Job& job : jobs) {
        if (job.model != m || !job.error.empty()) continue;
        const Group& g = groups[job.group];
        try {
          AccuracyCell cell = pd_accuracy(job.predictions, g.truths, pd);
          cell.model = m;
          cell.group = g.label;
          report.cells.push_back(std::move(cell));
        } catch (const Error& e) {
          report.diagnostics.push_back(g.label + "/" + std::string(to_string(m)) + ": " + e.what());
        }
      }
    }
  }
  // Cells follow group column order within each (pd, model) row.
  std::stable_sort(report.cells.begin(), report.cells.end(), [&](const AccuracyCell& a, const AccuracyCell& b) {
    auto pd_pos = [&](int pd) { return std::find(report.pds.begin(), report.pds.end(), pd) - report.pds.begin(); };
    auto model_pos = [&](ModelId m) { return std::find(report.models.begin(), report.models.end(), m) - report.models.begin(); };
    auto group_pos = [&](const std::string& g) { return std::find(report.groups.begin(), report.groups.end(), g) - report.groups.begin(); };
    if (pd_pos(a.pd) != pd_pos(b.pd)) return pd_pos(a.pd) < pd_pos(b.pd);
    if (model_pos(a.model) != model_pos(b.model)) return model_pos(a.model) < model_pos(b.model);
    return group_pos(a.group) < group_pos(b.group);
  });
  for (const auto& c : report.cells)
    if (c.missing_truth > 0 && c.pd == report.pds.front())
      report.diagnostics.push_back(c.group + "/" + std::string(to_string(c.model)) + ": " +
                                   std::to_string(c.missing_truth) + " predicted universities absent from target year");
  return report;
}

namespace {

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string format_report_text(const AccuracyReport& report) {
  std::ostringstream out;
  std::string header = pad("Model", 6, false) + pad("PD", 4, true);
  for (const auto& g : report.groups) header += pad(g + " (%)", 10, true);
  const std::string rule(header.size(), '-');
  out << header << '\n' << rule << '\n';
  for (int pd : report.pds) {
    for (ModelId m : report.models) {
      out << pad(std::string(to_string(m)), 6, false) << pad(std::to_string(pd), 4, true);
      for (const auto& g : report.groups) {
        const AccuracyCell* c = report.find(m, pd, g);
        out << pad(c ? fixed1(c->percentage) : "-", 10, true);
      }
      out << '\n';
    }
    out << rule << '\n';
  }
  return out.str();
}

std::string format_report_csv(const AccuracyReport& report) {
  std::ostringstream out;
  out << "model,pd,group,percentage,numerator,denominator\n";
  for (const auto& c : report.cells)
    out << to_string(c.model) << ',' << c.pd << ',' << c.group << ',' << fixed1(c.percentage) << ','
        << c.numerator << ',' << c.denominator << '\n';
  return out.str();
}

}  // namespace rankcast
