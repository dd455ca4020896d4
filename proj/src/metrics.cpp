#include "wristnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wristnet/errors.hpp"

namespace wristnet {

namespace {

void expect_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": " + std::to_string(a) + " scores but " +
                         std::to_string(b) + " labels");
  }
}

bool is_positive(double label, std::size_t i) {
  if (label == 1.0) return true;
  if (label == 0.0) return false;
  throw ValidationError("label " + std::to_string(label) + " at index " + std::to_string(i) +
                        " is not 0 or 1");
}

}  // namespace

Confusion confusion_at_threshold(std::span<const double> scores, std::span<const double> labels,
                                 double threshold) {
  expect_same_length(scores.size(), labels.size(), "confusion");
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (is_positive(labels[i], i)) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

ConfusionMetrics confusion_metrics(const Confusion& c) {
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  ConfusionMetrics m;
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.precision = ratio(c.tp, c.tp + c.fp);
  if (m.precision && m.sensitivity && *m.precision + *m.sensitivity > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.sensitivity / (*m.precision + *m.sensitivity);
  }
  if (m.sensitivity && m.specificity) m.balanced_accuracy = (*m.sensitivity + *m.specificity) / 2.0;
  return m;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const double> labels) {
  expect_same_length(scores.size(), labels.size(), "roc_auc");
  double positives = 0.0;
  double negatives = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(scores[i])) throw NumericError("roc_auc: non-finite score");
    is_positive(labels[i], i) ? ++positives : ++negatives;
  }
  if (positives == 0.0 || negatives == 0.0) {
    throw DegenerateLabelsError("AUC is undefined without both classes");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  // Twice the area, in units of (positive, negative) pairs.
  double doubled_area = 0.0;
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    double dtp = 0.0;
    double dfp = 0.0;
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      labels[order[i]] == 1.0 ? ++dtp : ++dfp;
    }
    doubled_area += dfp * (2.0 * tp + dtp);
    tp += dtp;
    fp += dfp;
    curve.points.push_back({fp / negatives, tp / positives});
  }
  curve.auc = doubled_area / (2.0 * positives * negatives);
  return curve;
}

double interpolate_tpr(const std::vector<RocPoint>& curve, double fpr) {
  if (curve.empty()) throw ValidationError("empty ROC curve");
  // Last point with point.fpr <= fpr.
  const auto after = std::upper_bound(curve.begin(), curve.end(), fpr,
                                      [](double x, const RocPoint& p) { return x < p.fpr; });
  if (after == curve.begin()) return curve.front().tpr;
  const auto& lo = *(after - 1);
  if (lo.fpr == fpr || after == curve.end()) return lo.tpr;
  const auto& hi = *after;
  const double t = (fpr - lo.fpr) / (hi.fpr - lo.fpr);
  return lo.tpr + t * (hi.tpr - lo.tpr);
}

std::vector<RocPoint> mean_roc(const std::vector<std::vector<RocPoint>>& curves) {
  if (curves.empty()) throw ValidationError("mean_roc needs at least one curve");
  std::vector<RocPoint> mean(kMeanRocGridPoints);
  std::vector<double> column(curves.size());
  for (std::size_t g = 0; g < kMeanRocGridPoints; ++g) {
    const double x = static_cast<double>(g) / static_cast<double>(kMeanRocGridPoints - 1);
    for (std::size_t c = 0; c < curves.size(); ++c) column[c] = interpolate_tpr(curves[c], x);
    // Sorted summation keeps the mean independent of curve order.
    std::sort(column.begin(), column.end());
    mean[g] = {x, std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(curves.size())};
  }
  return mean;
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw ValidationError("rmse of an empty set");
  expect_same_length(predictions.size(), targets.size(), "rmse");
  double ss = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(predictions.size()));
}

}  // namespace wristnet
