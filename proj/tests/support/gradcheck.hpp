#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "wristnet/network.hpp"

namespace wristnet::testing {

inline constexpr double kFdStep = 1e-4;
inline constexpr double kFdTolerance = 1e-4;

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double scale = 1.0);

// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates whose true
// gradient is ~0 from dividing rounding noise by itself.
double relative_error(double analytic, double numeric, double floor = 1e-6);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates where a ReLU switched between +h and -h
};

// A scalar objective over a flat list of tensors. `pattern` receives the
// on/off state of every piecewise-linear unit so kinks can be detected.
using Objective = std::function<double(const std::vector<Tensor>&, std::vector<bool>* pattern)>;

// Central differences on `coords` coordinates drawn without replacement,
// not counting skipped ones (all of them if there are fewer).
GradCheckResult check_gradients(const Objective& f, std::vector<Tensor> point,
                                const std::vector<Tensor>& analytic, std::size_t coords,
                                std::mt19937_64& rng);

// Each check builds a random instance from `seed`, projects the layer output
// on a random direction to get a scalar, and compares backward() against
// central differences over input and parameter coordinates.
GradCheckResult check_conv1d(std::uint64_t seed, std::size_t coords = 100);
GradCheckResult check_lstm(std::uint64_t seed, std::size_t steps, std::size_t coords = 100);
GradCheckResult check_dense(std::uint64_t seed, std::size_t coords = 100);
GradCheckResult check_network(std::uint64_t seed, Task task, std::size_t steps,
                              std::size_t coords = 100);

}  // namespace wristnet::testing
