#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace wristnet {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

inline constexpr double kDecisionThreshold = 0.5;

// Scores >= threshold count as positive predictions.
Confusion confusion_at_threshold(std::span<const double> scores, std::span<const double> labels,
                                 double threshold = kDecisionThreshold);

// Each metric is absent when its denominator is zero, never silently 0.
struct ConfusionMetrics {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> f1;
  std::optional<double> balanced_accuracy;
};

ConfusionMetrics confusion_metrics(const Confusion& c);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1), nondecreasing
  double auc = 0.0;
};

// Threshold sweep over the distinct scores, highest first. Tied scores move
// the curve along a diagonal, so the trapezoidal AUC equals the
// Mann-Whitney statistic with ties counted as one half. Single-class labels
// raise DegenerateLabelsError.
RocCurve roc_auc(std::span<const double> scores, std::span<const double> labels);

inline constexpr std::size_t kMeanRocGridPoints = 101;

// Vertical averaging: every curve's TPR is read off at FPR = 0, 0.01, ..., 1
// and averaged pointwise. Where a curve jumps vertically at a grid FPR, the
// top of the jump is used; between points TPR is linearly interpolated.
std::vector<RocPoint> mean_roc(const std::vector<std::vector<RocPoint>>& curves);

// TPR of `curve` at `fpr` under the convention above.
double interpolate_tpr(const std::vector<RocPoint>& curve, double fpr);

double rmse(std::span<const double> predictions, std::span<const double> targets);

}  // namespace wristnet
