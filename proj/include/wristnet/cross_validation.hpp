#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wristnet/metrics.hpp"
#include "wristnet/preprocess.hpp"
#include "wristnet/training.hpp"

namespace wristnet {

// Participants split into batches; every ordered (test, validation) pair of
// distinct batches is one run, so B batches give B*(B-1) runs.
struct FoldPlan {
  std::vector<std::vector<std::string>> batches;
  std::vector<std::pair<std::size_t, std::size_t>> runs;  // (test, val)

  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
};

// Seeded random partition of `participant_ids` into `n_batches` batches whose
// sizes differ by at most one. The one exception is 145 participants in 10
// batches, which reproduces the reference layout of nine batches of 15 and
// one of 10.
FoldPlan make_fold_plan(std::vector<std::string> participant_ids, std::size_t n_batches = 10,
                        std::uint64_t seed = 0);

// Throws IntegrityError if batches overlap, contain duplicates, or a run
// pairs a batch with itself.
void check_fold_plan(const FoldPlan& plan);

struct RunSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

RunSplit split_for_run(const FoldPlan& plan, std::size_t run_index);

struct RunReport {
  std::size_t run_id = 0;
  std::size_t test_batch = 0;
  std::size_t val_batch = 0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
  int stopped_epoch = 0;
  int best_epoch = 0;
  bool validation_downsampled = false;

  // Classification only.
  std::optional<Confusion> confusion;
  ConfusionMetrics metrics;
  std::vector<RocPoint> roc_points;
  std::optional<double> auc;

  // Regression only.
  std::optional<double> rmse;
};

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;      // population (divisor n)
  std::size_t n = 0;    // runs where the metric was defined
};

struct SummaryReport {
  std::map<std::string, MetricSummary> metrics;
  std::vector<RocPoint> mean_roc;  // empty for regression
  std::size_t runs = 0;
};

// Named per-run metric values, absent ones omitted.
std::map<std::string, double> metric_values(const RunReport& run);

// Mean and population SD per metric over the runs where it is defined.
// Independent of the order of `runs`.
SummaryReport summarize(const std::vector<RunReport>& runs);

struct NestedCvConfig {
  ModelConfig model;          // model.seed is the global seed
  std::size_t n_batches = 10;
  std::size_t workers = 1;
};

struct NestedCvResult {
  Task task = Task::Sedentary;
  FoldPlan plan;
  std::vector<RunReport> runs;  // ordered by run_id
  SummaryReport summary;
};

using RunCallback = std::function<void(const RunReport&)>;

// Participant-batched nested cross-validation over preprocessed windows.
// Each run trains on every batch except its test and validation batches,
// monitors the validation batch, and is scored on the untouched test batch.
// Run k uses seed model.seed + k, so the worker count never changes results.
NestedCvResult run_nested_cv(const std::vector<WindowSample>& windows, Task task,
                             const NestedCvConfig& config, const RunCallback& on_run = {});

// As above with a caller-supplied plan. Raises IntegrityError if any
// participant falls in two splits of a run or is missing from the plan.
NestedCvResult run_nested_cv(const std::vector<WindowSample>& windows, Task task,
                             const NestedCvConfig& config, const FoldPlan& plan,
                             const RunCallback& on_run = {});

}  // namespace wristnet
