#pragma once

#include <span>

#include "wristnet/parameters.hpp"

namespace wristnet {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

void validate(const AdamConfig& config);

// One bias-corrected Adam update of every tensor in `params`:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
// Throws NumericError (leaving `params` untouched) if any gradient is not finite.
void adam_step(NetworkParameters& params, std::span<const Tensor> grads, const AdamConfig& config);

}  // namespace wristnet
