#pragma once

#include <string>

#include "wristnet/tensor.hpp"

namespace wristnet {

enum class LossKind { BinaryCrossEntropy, MeanSquaredError };

std::string to_string(LossKind kind);

// Predictions are clamped to [kProbabilityClamp, 1 - kProbabilityClamp]
// before any logarithm is taken.
inline constexpr double kProbabilityClamp = 1e-7;

struct LossResult {
  double value = 0.0;
  Tensor grad;  // d value / d prediction
};

// BCE:  -(1/N) sum w_i [y_i log p_i + (1 - y_i) log(1 - p_i)],  p = clamp(y_hat)
// MSE:   (1/N) sum w_i (y_hat_i - y_i)^2
// `sample_weights` may be null, meaning all ones. The gradient is the exact
// derivative of the clamped expression, so it vanishes where the clamp binds.
LossResult loss(const Tensor& predictions, const Tensor& targets, LossKind kind,
                const Tensor* sample_weights = nullptr);

}  // namespace wristnet
