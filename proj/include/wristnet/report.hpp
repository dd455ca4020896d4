#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "wristnet/cross_validation.hpp"

namespace wristnet {

// Everything in report.json: fold plan, per-run metrics, summary mean/SD,
// config echo, library version and seeds. Contains nothing that depends on
// wall time or worker count, so identical inputs give identical bytes.
nlohmann::json report_json(const NestedCvResult& result, const NestedCvConfig& config);

// `fpr,tpr` CSV.
void write_roc_csv(const std::filesystem::path& path, const std::vector<RocPoint>& points);

// report.json, roc_run_<k>.csv per classification run, and roc_mean.csv.
void write_nested_cv_outputs(const std::filesystem::path& dir, const NestedCvResult& result,
                             const NestedCvConfig& config);

// Plain-text "metric  mean (sd)" table for a report.json document.
std::string format_summary_table(const nlohmann::json& report);

// Writes `text` to `path` via a temporary file and rename.
void write_file_atomically(const std::filesystem::path& path, const std::string& text);

}  // namespace wristnet
