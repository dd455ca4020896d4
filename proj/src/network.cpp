#include "wristnet/network.hpp"

#include <cmath>
#include <random>

#include "wristnet/errors.hpp"

namespace wristnet {

std::string to_string(Task task) {
  switch (task) {
    case Task::Sedentary: return "sedentary";
    case Task::Locomotion: return "locomotion";
    case Task::Lifestyle: return "lifestyle";
    case Task::MetRegression: return "met_regression";
  }
  return "?";
}

Task task_from_string(const std::string& name) {
  if (name == "sedentary") return Task::Sedentary;
  if (name == "locomotion") return Task::Locomotion;
  if (name == "lifestyle") return Task::Lifestyle;
  if (name == "met_regression" || name == "met") return Task::MetRegression;
  throw ValidationError("unknown task '" + name +
                        "' (expected sedentary, locomotion, lifestyle or met_regression)");
}

bool is_classification(Task task) { return task != Task::MetRegression; }

LossKind loss_kind(Task task) {
  return is_classification(task) ? LossKind::BinaryCrossEntropy : LossKind::MeanSquaredError;
}

std::vector<LayerSpec> reference_architecture(Task task) {
  const auto head = is_classification(task) ? Activation::Sigmoid : Activation::Linear;
  return {
      {LayerKind::Conv1D, kAxes, 16, 8, Activation::ReLU},
      {LayerKind::Conv1D, 16, 32, 8, Activation::ReLU},
      {LayerKind::Conv1D, 32, 64, 8, Activation::ReLU},
      {LayerKind::LSTM, 64, 50, 0, Activation::Tanh},
      {LayerKind::Dense, 50, 10, 0, Activation::ReLU},
      {LayerKind::Dense, 10, 1, 0, head},
  };
}

namespace {

Tensor glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(std::move(shape));
  for (auto& x : t.data()) x = dist(rng);
  return t;
}

}  // namespace

void Network::validate_layers() const {
  if (layers_.empty()) throw ValidationError("network has no layers");
  bool seen_lstm = false;
  std::size_t features = layers_.front().in_features;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const auto where = "layer " + std::to_string(i) + " (" + to_string(l.kind) + ")";
    if (l.in_features == 0 || l.out_features == 0) {
      throw ValidationError(where + ": feature counts must be positive");
    }
    if (l.in_features != features) {
      throw DimensionError(where + ": expects " + std::to_string(l.in_features) +
                           " input features, previous layer gives " + std::to_string(features));
    }
    switch (l.kind) {
      case LayerKind::Conv1D:
        if (seen_lstm) throw ValidationError(where + ": convolution after the LSTM");
        if (l.kernel_width == 0) throw ValidationError(where + ": kernel width must be positive");
        break;
      case LayerKind::LSTM:
        if (seen_lstm) throw ValidationError(where + ": only one LSTM layer is supported");
        seen_lstm = true;
        break;
      case LayerKind::Dense:
        if (!seen_lstm) throw ValidationError(where + ": dense layer before the LSTM");
        break;
    }
    features = l.out_features;
  }
  if (layers_.back().kind != LayerKind::Dense || features != 1) {
    throw ValidationError("network must end in a single-unit dense layer");
  }
}

Network::Network(std::vector<LayerSpec> layers, const InitOptions& init)
    : layers_(std::move(layers)) {
  validate_layers();
  std::mt19937_64 rng(init.seed);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const auto in = l.in_features;
    const auto out = l.out_features;
    const auto prefix = "layer" + std::to_string(i) + "/";
    first_param_.push_back(params_.size());
    switch (l.kind) {
      case LayerKind::Conv1D: {
        const auto k = l.kernel_width;
        params_.add(prefix + "kernel", glorot_uniform({k, in, out}, k * in, k * out, rng));
        params_.add(prefix + "bias", Tensor({out}));
        break;
      }
      case LayerKind::LSTM: {
        params_.add(prefix + "kernel", glorot_uniform({in, 4 * out}, in, 4 * out, rng));
        params_.add(prefix + "recurrent_kernel", glorot_uniform({out, 4 * out}, out, 4 * out, rng));
        Tensor bias({4 * out});
        for (std::size_t j = out; j < 2 * out; ++j) bias[j] = init.lstm_forget_bias;
        params_.add(prefix + "bias", std::move(bias));
        break;
      }
      case LayerKind::Dense:
        params_.add(prefix + "kernel", glorot_uniform({in, out}, in, out, rng));
        params_.add(prefix + "bias", Tensor({out}));
        break;
    }
  }
}

Network::Network(std::vector<LayerSpec> layers, NetworkParameters params)
    : layers_(std::move(layers)), params_(std::move(params)) {
  validate_layers();
  std::size_t next = 0;
  for (const auto& l : layers_) {
    first_param_.push_back(next);
    const auto in = l.in_features;
    const auto out = l.out_features;
    std::vector<std::vector<std::size_t>> shapes;
    switch (l.kind) {
      case LayerKind::Conv1D: shapes = {{l.kernel_width, in, out}, {out}}; break;
      case LayerKind::LSTM: shapes = {{in, 4 * out}, {out, 4 * out}, {4 * out}}; break;
      case LayerKind::Dense: shapes = {{in, out}, {out}}; break;
    }
    for (const auto& s : shapes) {
      if (next >= params_.size()) throw DimensionError("too few parameter tensors for network");
      expect_shape(params_.value(next), s, params_.tensors[next].name.c_str());
      ++next;
    }
  }
  if (next != params_.size()) throw DimensionError("too many parameter tensors for network");
}

std::vector<std::vector<std::size_t>> Network::output_shapes(std::size_t length) const {
  std::vector<std::vector<std::size_t>> shapes;
  for (const auto& l : layers_) {
    if (l.kind == LayerKind::Conv1D) {
      shapes.push_back({length, l.out_features});
    } else {
      shapes.push_back({l.out_features});
    }
  }
  return shapes;
}

Tensor Network::forward_layer(std::size_t i, const Tensor& x, ForwardTrace* trace) const {
  const auto& l = layers_[i];
  const auto p = first_param_[i];
  switch (l.kind) {
    case LayerKind::Conv1D: {
      Conv1DCache* c = trace ? &trace->layers[i].emplace<Conv1DCache>() : nullptr;
      return conv1d_forward(x, params_.value(p), params_.value(p + 1), l.activation, c);
    }
    case LayerKind::LSTM: {
      LstmCache* c = trace ? &trace->layers[i].emplace<LstmCache>() : nullptr;
      return lstm_forward(x, params_.value(p), params_.value(p + 1), params_.value(p + 2), c);
    }
    case LayerKind::Dense: {
      DenseCache* c = trace ? &trace->layers[i].emplace<DenseCache>() : nullptr;
      return dense_forward(x, params_.value(p), params_.value(p + 1), l.activation, c);
    }
  }
  return x;
}

Tensor Network::backward_layer(std::size_t i, const LayerCache& cache, const Tensor& upstream,
                               std::vector<Tensor>& grads) const {
  const auto p = first_param_[i];
  const auto mismatch = [&](const char* kind) {
    return StateError("trace layer " + std::to_string(i) + " is not a " + kind + " cache");
  };
  switch (layers_[i].kind) {
    case LayerKind::Conv1D: {
      const auto* c = std::get_if<Conv1DCache>(&cache);
      if (!c) throw mismatch("Conv1D");
      auto g = conv1d_backward(upstream, *c, params_.value(p));
      grads[p].vector() += g.weights.vector();
      grads[p + 1].vector() += g.bias.vector();
      return std::move(g.input);
    }
    case LayerKind::LSTM: {
      const auto* c = std::get_if<LstmCache>(&cache);
      if (!c) throw mismatch("LSTM");
      auto g = upstream.rank() == 1
                   ? lstm_backward(upstream, *c, params_.value(p), params_.value(p + 1))
                   : lstm_backward_batch(upstream, *c, params_.value(p), params_.value(p + 1));
      grads[p].vector() += g.input_weights.vector();
      grads[p + 1].vector() += g.recurrent_weights.vector();
      grads[p + 2].vector() += g.bias.vector();
      return std::move(g.input);
    }
    case LayerKind::Dense: {
      const auto* c = std::get_if<DenseCache>(&cache);
      if (!c) throw mismatch("Dense");
      auto g = dense_backward(upstream, *c, params_.value(p));
      grads[p].vector() += g.weights.vector();
      grads[p + 1].vector() += g.bias.vector();
      return std::move(g.input);
    }
  }
  return upstream;
}

void Network::check_window(const Tensor& window) const {
  expect_rank(window, 2, "network input");
  if (window.dim(1) != layers_.front().in_features) {
    throw DimensionError("network input: expected " + std::to_string(layers_.front().in_features) +
                         " channels, got shape " + window.shape_string());
  }
}

std::size_t Network::lstm_index() const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].kind == LayerKind::LSTM) return i;
  }
  return layers_.size();
}

double Network::forward(const Tensor& window, ForwardTrace* trace) const {
  check_window(window);
  if (trace) trace->layers.resize(layers_.size());
  Tensor x = window;
  for (std::size_t i = 0; i < layers_.size(); ++i) x = forward_layer(i, x, trace);
  if (trace) trace->output = x[0];
  return x[0];
}

Tensor Network::backward(const ForwardTrace& trace, double grad_output,
                         std::vector<Tensor>& grads) const {
  if (trace.layers.size() != layers_.size()) {
    throw StateError("network backward called without a matching forward trace");
  }
  if (grads.size() != params_.size()) {
    throw DimensionError("network backward: gradient list does not match parameters");
  }
  Tensor upstream({1}, grad_output);
  for (std::size_t i = layers_.size(); i-- > 0;) {
    upstream = backward_layer(i, trace.layers[i], upstream, grads);
  }
  return upstream;
}

std::vector<double> Network::forward_batch(std::span<const Tensor* const> windows,
                                           BatchTrace* trace) const {
  if (windows.empty()) throw ValidationError("forward_batch: empty batch");
  const auto n = windows.size();
  const auto lstm = lstm_index();
  const auto steps = windows[0]->dim(0);
  if (trace) {
    trace->samples.assign(n, {});
    for (auto& s : trace->samples) s.layers.resize(layers_.size());
  }

  const auto features = layers_[lstm].in_features;
  Tensor stacked({n, steps, features});
  for (std::size_t b = 0; b < n; ++b) {
    check_window(*windows[b]);
    if (windows[b]->dim(0) != steps) {
      throw DimensionError("forward_batch: windows differ in length");
    }
    ForwardTrace* t = trace ? &trace->samples[b] : nullptr;
    Tensor x = *windows[b];
    for (std::size_t i = 0; i < lstm; ++i) x = forward_layer(i, x, t);
    std::copy(x.values().begin(), x.values().end(),
              stacked.data().begin() + static_cast<std::ptrdiff_t>(b * steps * features));
  }

  const auto p = first_param_[lstm];
  const Tensor h = lstm_forward_batch(stacked, params_.value(p), params_.value(p + 1),
                                      params_.value(p + 2), trace ? &trace->lstm : nullptr);
  const auto hidden = h.dim(1);
  std::vector<double> out(n);
  for (std::size_t b = 0; b < n; ++b) {
    ForwardTrace* t = trace ? &trace->samples[b] : nullptr;
    Tensor x({hidden});
    for (std::size_t j = 0; j < hidden; ++j) x[j] = h.at(b, j);
    for (std::size_t i = lstm + 1; i < layers_.size(); ++i) x = forward_layer(i, x, t);
    out[b] = x[0];
    if (t) t->output = x[0];
  }
  return out;
}

void Network::backward_batch(const BatchTrace& trace, std::span<const double> grad_outputs,
                             std::vector<Tensor>& grads) const {
  const auto n = trace.samples.size();
  if (n == 0 || !trace.lstm.valid() || trace.lstm.batch != n) {
    throw StateError("network backward_batch called without a matching forward trace");
  }
  if (grad_outputs.size() != n) {
    throw DimensionError("network backward_batch: one output gradient per window expected");
  }
  if (grads.size() != params_.size()) {
    throw DimensionError("network backward_batch: gradient list does not match parameters");
  }
  const auto lstm = lstm_index();
  const auto hidden = layers_[lstm].out_features;

  Tensor grad_h({n, hidden});
  for (std::size_t b = 0; b < n; ++b) {
    Tensor upstream({1}, grad_outputs[b]);
    for (std::size_t i = layers_.size(); i-- > lstm + 1;) {
      upstream = backward_layer(i, trace.samples[b].layers[i], upstream, grads);
    }
    for (std::size_t j = 0; j < hidden; ++j) grad_h.at(b, j) = upstream[j];
  }

  const Tensor grad_seq = backward_layer(lstm, trace.lstm, grad_h, grads);
  const auto steps = grad_seq.dim(1);
  const auto features = grad_seq.dim(2);
  for (std::size_t b = 0; b < n; ++b) {
    const auto first = grad_seq.values().begin() + static_cast<std::ptrdiff_t>(b * steps * features);
    Tensor upstream({steps, features}, std::span<const double>(first, steps * features));
    for (std::size_t i = lstm; i-- > 0;) {
      upstream = backward_layer(i, trace.samples[b].layers[i], upstream, grads);
    }
  }
}

Network build_network(Task task, std::uint64_t seed) {
  return Network(reference_architecture(task), InitOptions{seed, 1.0});
}

}  // namespace wristnet
