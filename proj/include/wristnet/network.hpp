#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wristnet/layers.hpp"
#include "wristnet/loss.hpp"
#include "wristnet/parameters.hpp"

namespace wristnet {

// 15 s of tri-axial acceleration at 30 Hz.
inline constexpr std::size_t kWindowLength = 450;
inline constexpr std::size_t kAxes = 3;

enum class Task { Sedentary, Locomotion, Lifestyle, MetRegression };

std::string to_string(Task task);
Task task_from_string(const std::string& name);
bool is_classification(Task task);
LossKind loss_kind(Task task);

// Conv1D(3->16) -> Conv1D(16->32) -> Conv1D(32->64), all K=8 ReLU ->
// LSTM(64->50) -> Dense(50->10, ReLU) -> Dense(10->1). The head is sigmoid
// for the classification tasks and linear for MET regression.
std::vector<LayerSpec> reference_architecture(Task task);

struct InitOptions {
  std::uint64_t seed = 0;
  double lstm_forget_bias = 1.0;
};

using LayerCache = std::variant<Conv1DCache, LstmCache, DenseCache>;

struct ForwardTrace {
  std::vector<LayerCache> layers;
  double output = 0.0;
};

// Per-window caches for the convolution and dense layers; the LSTM runs once
// over the whole batch and keeps a single batched cache.
struct BatchTrace {
  std::vector<ForwardTrace> samples;
  LstmCache lstm;
};

// A validated conv* -> LSTM -> dense+ stack with its parameters. Parameter
// tensors are stored layer by layer: conv (W, b), LSTM (W, U, b), dense (W, b).
class Network {
 public:
  Network() = default;
  // Glorot-uniform weights, zero biases, LSTM forget-gate bias set per `init`.
  Network(std::vector<LayerSpec> layers, const InitOptions& init);
  Network(std::vector<LayerSpec> layers, NetworkParameters params);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const NetworkParameters& parameters() const { return params_; }
  NetworkParameters& parameters() { return params_; }

  // Output shape of every layer for an input of [length, in_features].
  std::vector<std::vector<std::size_t>> output_shapes(std::size_t length) const;

  // Scalar output for one window [T, C_in]. When `trace` is non-null every
  // layer's cache is recorded for `backward`.
  double forward(const Tensor& window, ForwardTrace* trace = nullptr) const;

  // Accumulates d(loss)/d(params) into `grads` (shaped like parameters())
  // given d(loss)/d(output). Returns d(loss)/d(window).
  Tensor backward(const ForwardTrace& trace, double grad_output, std::vector<Tensor>& grads) const;

  // Same as calling forward/backward per window, but the LSTM recurrence is
  // evaluated for all windows at once. Windows must share one length.
  // Results agree with the per-window path up to floating-point summation
  // order.
  std::vector<double> forward_batch(std::span<const Tensor* const> windows,
                                    BatchTrace* trace = nullptr) const;
  void backward_batch(const BatchTrace& trace, std::span<const double> grad_outputs,
                      std::vector<Tensor>& grads) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  void validate_layers() const;
  void check_window(const Tensor& window) const;
  std::size_t lstm_index() const;
  Tensor forward_layer(std::size_t i, const Tensor& x, ForwardTrace* trace) const;
  Tensor backward_layer(std::size_t i, const LayerCache& cache, const Tensor& upstream,
                        std::vector<Tensor>& grads) const;

  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> first_param_;  // index of each layer's first tensor
  NetworkParameters params_;
};

// The reference network for `task`, seeded initialization.
Network build_network(Task task, std::uint64_t seed);

}  // namespace wristnet
