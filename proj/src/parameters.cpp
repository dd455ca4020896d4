#include "wristnet/parameters.hpp"

namespace wristnet {

std::size_t NetworkParameters::add(std::string name, Tensor value) {
  ParameterTensor p{std::move(name), std::move(value), {}, {}};
  p.m = Tensor::zeros_like(p.value);
  p.v = Tensor::zeros_like(p.value);
  tensors.push_back(std::move(p));
  return tensors.size() - 1;
}

std::size_t NetworkParameters::total_count() const {
  std::size_t n = 0;
  for (const auto& p : tensors) n += p.value.size();
  return n;
}

std::vector<Tensor> NetworkParameters::zero_gradients() const {
  std::vector<Tensor> g;
  g.reserve(tensors.size());
  for (const auto& p : tensors) g.push_back(Tensor::zeros_like(p.value));
  return g;
}

}  // namespace wristnet
