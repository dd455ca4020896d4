#pragma once

#include <cstddef>
#include <string>

#include "wristnet/tensor.hpp"

namespace wristnet {

enum class LayerKind { Conv1D, LSTM, Dense };
enum class Activation { ReLU, Sigmoid, Tanh, Linear };

std::string to_string(LayerKind kind);
std::string to_string(Activation act);
LayerKind layer_kind_from_string(const std::string& name);
Activation activation_from_string(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::size_t kernel_width = 0;  // Conv1D only
  Activation activation = Activation::Linear;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Conv1D: K*C_in*C_out + C_out. LSTM: 4*((C_in + H)*H + H). Dense: C_in*C_out + C_out.
std::size_t parameter_count(const LayerSpec& spec);

// Applies `act` elementwise in place.
void apply_activation(Activation act, Tensor& t);
// Multiplies `grad` in place by the activation derivative, expressed through
// the activation's output.
void scale_by_activation_derivative(Activation act, const Tensor& output, Tensor& grad);

struct LayerGradients {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

// ---- Conv1D ---------------------------------------------------------------
//
// Stride 1, length-preserving zero padding: floor((K-1)/2) on the left and
// ceil((K-1)/2) on the right. Weights are [K, C_in, C_out].

struct Conv1DCache {
  Tensor columns;  // [T, K*C_in] unfolded input
  Tensor output;   // post-activation [T, C_out]
  std::size_t kernel_width = 0;
  std::size_t in_channels = 0;
  Activation activation = Activation::Linear;

  bool valid() const { return !columns.empty(); }
  void clear() { columns = {}; output = {}; }
};

Tensor conv1d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      Activation act, Conv1DCache* cache = nullptr);
LayerGradients conv1d_backward(const Tensor& grad_out, const Conv1DCache& cache,
                               const Tensor& weights);

// ---- LSTM -----------------------------------------------------------------
//
// Gate blocks are laid out [input | forget | candidate | output] along the
// 4H axis. h_0 = c_0 = 0 and only the final hidden state is returned.
// The batched forms run B equal-length sequences through one recurrence.

struct LstmCache {
  std::size_t batch = 0;
  // Row b*T + t holds sequence b at step t.
  Tensor input;      // [B*T, C_in]
  Tensor gates;      // [B*T, 4H] post-activation
  Tensor cell;       // [B*T, H]
  Tensor cell_tanh;  // [B*T, H]
  Tensor hidden;     // [B*T, H]

  bool valid() const { return !gates.empty(); }
  void clear() { *this = {}; }
};

struct LstmGradients {
  Tensor input;
  Tensor input_weights;
  Tensor recurrent_weights;
  Tensor bias;
};

// input [T, C_in] -> h_T [H].
Tensor lstm_forward(const Tensor& input, const Tensor& input_weights,
                    const Tensor& recurrent_weights, const Tensor& bias,
                    LstmCache* cache = nullptr);
LstmGradients lstm_backward(const Tensor& grad_last_hidden, const LstmCache& cache,
                            const Tensor& input_weights, const Tensor& recurrent_weights);

// input [B, T, C_in] -> h_T [B, H]; grad input [B, T, C_in]. Parameter
// gradients are summed over the batch.
Tensor lstm_forward_batch(const Tensor& input, const Tensor& input_weights,
                          const Tensor& recurrent_weights, const Tensor& bias,
                          LstmCache* cache = nullptr);
LstmGradients lstm_backward_batch(const Tensor& grad_last_hidden, const LstmCache& cache,
                                  const Tensor& input_weights, const Tensor& recurrent_weights);

// ---- Dense ----------------------------------------------------------------

struct DenseCache {
  Tensor input;   // [C_in]
  Tensor output;  // post-activation [C_out]
  Activation activation = Activation::Linear;

  bool valid() const { return !output.empty(); }
  void clear() { input = {}; output = {}; }
};

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                     Activation act, DenseCache* cache = nullptr);
LayerGradients dense_backward(const Tensor& grad_out, const DenseCache& cache,
                              const Tensor& weights);

}  // namespace wristnet
