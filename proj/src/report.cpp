#include "wristnet/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wristnet/checkpoint.hpp"
#include "wristnet/dataset_io.hpp"
#include "wristnet/errors.hpp"
#include "wristnet/version.hpp"

namespace wristnet {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json run_json(const RunReport& r) {
  json j = {{"run_id", r.run_id},
            {"test_batch", r.test_batch},
            {"val_batch", r.val_batch},
            {"seed", r.seed},
            {"n_train", r.n_train},
            {"n_val", r.n_val},
            {"n_test", r.n_test},
            {"stopped_epoch", r.stopped_epoch},
            {"best_epoch", r.best_epoch}};
  if (r.confusion) {
    j["validation_downsampled"] = r.validation_downsampled;
    j["confusion"] = {{"tp", r.confusion->tp}, {"fp", r.confusion->fp},
                      {"tn", r.confusion->tn}, {"fn", r.confusion->fn}};
    j["metrics"] = {{"balanced_accuracy", optional_number(r.metrics.balanced_accuracy)},
                    {"f1", optional_number(r.metrics.f1)},
                    {"auc", optional_number(r.auc)},
                    {"sensitivity", optional_number(r.metrics.sensitivity)},
                    {"specificity", optional_number(r.metrics.specificity)},
                    {"precision", optional_number(r.metrics.precision)}};
    json absent = json::array();
    for (const auto& [name, value] : j["metrics"].items()) {
      if (value.is_null()) absent.push_back(name);
    }
    if (!absent.empty()) j["undefined_metrics"] = absent;
  } else {
    j["metrics"] = {{"rmse", optional_number(r.rmse)}};
  }
  return j;
}

}  // namespace

json report_json(const NestedCvResult& result, const NestedCvConfig& config) {
  json cfg = to_json(config.model);
  cfg["task"] = to_string(result.task);
  cfg["n_batches"] = config.n_batches;

  json runs = json::array();
  for (const auto& r : result.runs) runs.push_back(run_json(r));

  json metrics = json::object();
  for (const auto& [name, m] : result.summary.metrics) {
    metrics[name] = {{"mean", m.mean}, {"sd", m.sd}, {"n", m.n}};
  }

  json runs_plan = json::array();
  for (const auto& [test, val] : result.plan.runs) runs_plan.push_back({test, val});

  return {{"tool", "wristnet"},
          {"version", kVersion},
          {"task", to_string(result.task)},
          {"config", cfg},
          {"seeds", {{"global", config.model.seed}, {"per_run", "global + run_id"}}},
          {"conventions",
           {{"sd", "population (divisor = number of runs where the metric is defined)"},
            {"aggregation", "per-run metrics, then mean/sd across runs"},
            {"test_set", "full test batch, not downsampled"},
            {"validation_set", "majority class downsampled for classification"},
            {"decision_threshold", kDecisionThreshold},
            {"mean_roc", "vertical averaging on 101 FPR grid points"}}},
          {"fold_plan", {{"batches", result.plan.batches}, {"runs", runs_plan}}},
          {"runs", runs},
          {"summary", {{"runs", result.summary.runs}, {"metrics", metrics}}}};
}

void write_file_atomically(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_roc_csv(const fs::path& path, const std::vector<RocPoint>& points) {
  std::ostringstream os;
  os << "fpr,tpr\n";
  for (const auto& p : points) os << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
  write_file_atomically(path, os.str());
}

void write_nested_cv_outputs(const fs::path& dir, const NestedCvResult& result,
                             const NestedCvConfig& config) {
  fs::create_directories(dir);
  write_file_atomically(dir / "report.json", report_json(result, config).dump(2) + "\n");
  if (!is_classification(result.task)) return;
  for (const auto& r : result.runs) {
    if (!r.roc_points.empty()) write_roc_csv(dir / ("roc_run_" + std::to_string(r.run_id) + ".csv"), r.roc_points);
  }
  if (!result.summary.mean_roc.empty()) write_roc_csv(dir / "roc_mean.csv", result.summary.mean_roc);
}

std::string format_summary_table(const json& report) {
  std::ostringstream os;
  try {
    os << "task: " << report.at("task").get<std::string>() << "   runs: "
       << report.at("summary").at("runs").get<std::size_t>() << "\n";
    static const char* order[] = {"balanced_accuracy", "f1", "auc", "sensitivity",
                                  "specificity", "precision", "rmse"};
    const auto& metrics = report.at("summary").at("metrics");
    for (const char* name : order) {
      if (!metrics.contains(name)) continue;
      const auto& m = metrics[name];
      char line[128];
      std::snprintf(line, sizeof(line), "%-18s %.3f (%.3f)   n=%zu\n", name, m.at("mean").get<double>(),
                    m.at("sd").get<double>(), m.at("n").get<std::size_t>());
      os << line;
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("not a nested-cv report: ") + e.what());
  }
  return os.str();
}

}  // namespace wristnet
