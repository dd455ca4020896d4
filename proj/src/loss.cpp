#include "wristnet/loss.hpp"

#include <algorithm>
#include <cmath>

#include "wristnet/errors.hpp"

namespace wristnet {

std::string to_string(LossKind kind) {
  return kind == LossKind::BinaryCrossEntropy ? "binary_cross_entropy" : "mean_squared_error";
}

LossResult loss(const Tensor& predictions, const Tensor& targets, LossKind kind,
                const Tensor* sample_weights) {
  const auto n = predictions.size();
  if (n == 0) throw ValidationError("loss: empty batch");
  expect_rank(predictions, 1, "loss predictions");
  expect_shape(targets, predictions.shape(), "loss targets");
  if (sample_weights) expect_shape(*sample_weights, predictions.shape(), "loss sample weights");
  expect_finite(predictions, "loss predictions");

  LossResult r;
  r.grad = Tensor(predictions.shape());
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sample_weights ? (*sample_weights)[i] : 1.0;
    const double y = targets[i];
    const double y_hat = predictions[i];
    if (kind == LossKind::BinaryCrossEntropy) {
      if (y != 0.0 && y != 1.0) {
        throw ValidationError("binary cross-entropy target " + std::to_string(y) +
                              " at index " + std::to_string(i) + " is not 0 or 1");
      }
      const double p = std::clamp(y_hat, kProbabilityClamp, 1.0 - kProbabilityClamp);
      total += -w * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
      const bool clamped = y_hat < kProbabilityClamp || y_hat > 1.0 - kProbabilityClamp;
      r.grad[i] = clamped ? 0.0 : -w * inv_n * (y / p - (1.0 - y) / (1.0 - p));
    } else {
      const double diff = y_hat - y;
      total += w * diff * diff;
      r.grad[i] = 2.0 * w * inv_n * diff;
    }
  }
  r.value = total * inv_n;
  return r;
}

}  // namespace wristnet
