#include "wristnet/optimizer.hpp"

#include <cmath>

#include "wristnet/errors.hpp"

namespace wristnet {

void validate(const AdamConfig& c) {
  if (!(c.learning_rate > 0.0) || !(c.epsilon > 0.0)) {
    throw ValidationError("adam: learning rate and epsilon must be positive");
  }
  if (!(c.beta1 > 0.0 && c.beta1 < 1.0) || !(c.beta2 > 0.0 && c.beta2 < 1.0)) {
    throw ValidationError("adam: beta1 and beta2 must lie in (0, 1)");
  }
}

void adam_step(NetworkParameters& params, std::span<const Tensor> grads, const AdamConfig& config) {
  validate(config);
  if (grads.size() != params.size()) {
    throw DimensionError("adam: got " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(params.size()) + " parameter tensors");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    expect_shape(grads[i], params.tensors[i].value.shape(), params.tensors[i].name.c_str());
    if (!grads[i].all_finite()) {
      throw NumericError("adam: non-finite gradient in '" + params.tensors[i].name +
                         "' at step " + std::to_string(params.step + 1));
    }
  }

  params.step += 1;
  const auto t = static_cast<double>(params.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto& p = params.tensors[i];
    const auto g = grads[i].vector().array();
    auto m = p.m.vector().array();
    auto v = p.v.vector().array();
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.square();
    p.value.vector().array() -=
        config.learning_rate * (m / correction1) / ((v / correction2).sqrt() + config.epsilon);
  }
}

}  // namespace wristnet
