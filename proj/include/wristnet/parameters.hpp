#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wristnet/tensor.hpp"

namespace wristnet {

// One trainable tensor plus its Adam moment accumulators. `m` and `v` always
// share the shape of `value`.
struct ParameterTensor {
  std::string name;
  Tensor value;
  Tensor m;
  Tensor v;

  friend bool operator==(const ParameterTensor&, const ParameterTensor&) = default;
};

struct NetworkParameters {
  std::vector<ParameterTensor> tensors;
  std::int64_t step = 0;  // Adam step counter

  // Appends a tensor with zeroed moments and returns its index.
  std::size_t add(std::string name, Tensor value);
  const Tensor& value(std::size_t i) const { return tensors[i].value; }
  Tensor& value(std::size_t i) { return tensors[i].value; }
  std::size_t size() const { return tensors.size(); }
  std::size_t total_count() const;
  // Zeroed tensors shaped like every parameter, in order.
  std::vector<Tensor> zero_gradients() const;

  friend bool operator==(const NetworkParameters&, const NetworkParameters&) = default;
};

}  // namespace wristnet
