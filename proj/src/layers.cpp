#include "wristnet/layers.hpp"

#include <cmath>

#include "wristnet/errors.hpp"

namespace wristnet {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename Block>
void sigmoid_inplace(Block&& x) {
  x = (1.0 + (-x.array()).exp()).inverse().matrix();
}

// tanh through exp keeps the gate loop vectorized.
template <typename Block>
void tanh_inplace(Block&& x) {
  x = (2.0 / (1.0 + (-2.0 * x.array()).exp()) - 1.0).matrix();
}

std::string dims(std::size_t a, std::size_t b) {
  return "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

}  // namespace

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv1D: return "Conv1D";
    case LayerKind::LSTM: return "LSTM";
    case LayerKind::Dense: return "Dense";
  }
  return "?";
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Linear: return "linear";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string& name) {
  if (name == "Conv1D") return LayerKind::Conv1D;
  if (name == "LSTM") return LayerKind::LSTM;
  if (name == "Dense") return LayerKind::Dense;
  throw ValidationError("unknown layer kind '" + name + "'");
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  if (name == "linear") return Activation::Linear;
  throw ValidationError("unknown activation '" + name + "'");
}

std::size_t parameter_count(const LayerSpec& spec) {
  const auto in = spec.in_features;
  const auto out = spec.out_features;
  switch (spec.kind) {
    case LayerKind::Conv1D: return spec.kernel_width * in * out + out;
    case LayerKind::LSTM: return 4 * ((in + out) * out + out);
    case LayerKind::Dense: return in * out + out;
  }
  return 0;
}

void apply_activation(Activation act, Tensor& t) {
  auto a = t.vector().array();
  switch (act) {
    case Activation::ReLU: a = a.max(0.0); break;
    case Activation::Sigmoid:
      for (auto& x : t.data()) x = sigmoid(x);
      break;
    case Activation::Tanh: a = a.tanh(); break;
    case Activation::Linear: break;
  }
}

void scale_by_activation_derivative(Activation act, const Tensor& output, Tensor& grad) {
  auto g = grad.vector().array();
  const auto y = output.vector().array();
  switch (act) {
    case Activation::ReLU: g = (y > 0.0).select(g, 0.0); break;
    case Activation::Sigmoid: g *= y * (1.0 - y); break;
    case Activation::Tanh: g *= 1.0 - y.square(); break;
    case Activation::Linear: break;
  }
}

// ---- Conv1D ---------------------------------------------------------------

Tensor conv1d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      Activation act, Conv1DCache* cache) {
  expect_rank(input, 2, "conv1d input");
  expect_rank(weights, 3, "conv1d weights");
  const auto length = input.dim(0);
  const auto in_ch = input.dim(1);
  const auto kernel = weights.dim(0);
  const auto out_ch = weights.dim(2);
  if (weights.dim(1) != in_ch) {
    throw DimensionError("conv1d: input has " + std::to_string(in_ch) +
                         " channels but weights expect " + std::to_string(weights.dim(1)));
  }
  expect_shape(bias, {out_ch}, "conv1d bias");

  const std::size_t pad_left = (kernel - 1) / 2;
  Tensor columns({length, kernel * in_ch});
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t k = 0; k < kernel; ++k) {
      const auto src = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(pad_left);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(length)) continue;
      for (std::size_t c = 0; c < in_ch; ++c) {
        columns.at(t, k * in_ch + c) = input.at(static_cast<std::size_t>(src), c);
      }
    }
  }

  Tensor out({length, out_ch});
  auto out_m = out.matrix();
  out_m.noalias() = columns.matrix() * weights.matrix();
  out_m.rowwise() += bias.vector().transpose();
  apply_activation(act, out);

  if (cache) {
    cache->columns = std::move(columns);
    cache->output = out;
    cache->kernel_width = kernel;
    cache->in_channels = in_ch;
    cache->activation = act;
  }
  return out;
}

LayerGradients conv1d_backward(const Tensor& grad_out, const Conv1DCache& cache,
                               const Tensor& weights) {
  if (!cache.valid()) throw StateError("conv1d_backward called without a forward cache");
  expect_shape(grad_out, cache.output.shape(), "conv1d grad_out");
  if (weights.dim(0) != cache.kernel_width || weights.dim(1) != cache.in_channels) {
    throw DimensionError("conv1d_backward: weights do not match cached forward call");
  }
  const auto length = grad_out.dim(0);
  const auto in_ch = cache.in_channels;
  const auto kernel = cache.kernel_width;
  const std::size_t pad_left = (kernel - 1) / 2;

  Tensor delta = grad_out;
  scale_by_activation_derivative(cache.activation, cache.output, delta);

  LayerGradients g;
  g.weights = Tensor(weights.shape());
  g.weights.matrix().noalias() = cache.columns.matrix().transpose() * delta.matrix();
  g.bias = Tensor({weights.dim(2)});
  g.bias.vector() = delta.matrix().colwise().sum().transpose();

  Tensor grad_columns({length, kernel * in_ch});
  grad_columns.matrix().noalias() = delta.matrix() * weights.matrix().transpose();
  g.input = Tensor({length, in_ch});
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t k = 0; k < kernel; ++k) {
      const auto src = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(pad_left);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(length)) continue;
      for (std::size_t c = 0; c < in_ch; ++c) {
        g.input.at(static_cast<std::size_t>(src), c) += grad_columns.at(t, k * in_ch + c);
      }
    }
  }
  return g;
}

// ---- LSTM -----------------------------------------------------------------

namespace {

using StridedMatrix = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;

// Rows t of every sequence in a [B*T, cols] matrix, viewed as [B, cols].
StridedMatrix step_rows(Tensor& t, std::size_t step, std::size_t steps, std::size_t batch) {
  const auto cols = static_cast<Eigen::Index>(t.dim(1));
  return {t.data().data() + step * t.dim(1), static_cast<Eigen::Index>(batch), cols,
          Eigen::OuterStride<>(static_cast<Eigen::Index>(steps) * cols)};
}

using ConstStridedMatrix = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

ConstStridedMatrix step_rows(const Tensor& t, std::size_t step, std::size_t steps,
                             std::size_t batch) {
  const auto cols = static_cast<Eigen::Index>(t.dim(1));
  return {t.data().data() + step * t.dim(1), static_cast<Eigen::Index>(batch), cols,
          Eigen::OuterStride<>(static_cast<Eigen::Index>(steps) * cols)};
}

struct LstmShape {
  std::size_t batch;
  std::size_t steps;
  std::size_t in_features;
  std::size_t hidden;
};

LstmShape check_lstm_args(const Tensor& input, const Tensor& input_weights,
                          const Tensor& recurrent_weights, const Tensor& bias) {
  expect_rank(input, 3, "lstm input");
  expect_rank(recurrent_weights, 2, "lstm recurrent weights");
  const LstmShape s{input.dim(0), input.dim(1), input.dim(2), recurrent_weights.dim(0)};
  expect_shape(input_weights, {s.in_features, 4 * s.hidden}, "lstm input weights");
  expect_shape(recurrent_weights, {s.hidden, 4 * s.hidden}, "lstm recurrent weights");
  expect_shape(bias, {4 * s.hidden}, "lstm bias");
  return s;
}

}  // namespace

Tensor lstm_forward_batch(const Tensor& input, const Tensor& input_weights,
                          const Tensor& recurrent_weights, const Tensor& bias, LstmCache* cache) {
  const auto s = check_lstm_args(input, input_weights, recurrent_weights, bias);
  const auto rows = s.batch * s.steps;
  const auto H = static_cast<Eigen::Index>(s.hidden);
  const auto B = static_cast<Eigen::Index>(s.batch);

  Tensor flat_input({rows, s.in_features}, input.values());
  Tensor gates({rows, 4 * s.hidden});
  gates.matrix().noalias() = flat_input.matrix() * input_weights.matrix();
  gates.matrix().rowwise() += bias.vector().transpose();

  Tensor cell({rows, s.hidden});
  Tensor cell_tanh({rows, s.hidden});
  Tensor hid({rows, s.hidden});
  const auto u = recurrent_weights.matrix();
  RowMatrix h_prev = RowMatrix::Zero(B, H);
  RowMatrix c_prev = RowMatrix::Zero(B, H);
  for (std::size_t step = 0; step < s.steps; ++step) {
    auto z = step_rows(gates, step, s.steps, s.batch);
    if (step > 0) z.noalias() += h_prev * u;
    sigmoid_inplace(z.leftCols(2 * H));
    tanh_inplace(z.middleCols(2 * H, H));
    sigmoid_inplace(z.rightCols(H));
    auto c = step_rows(cell, step, s.steps, s.batch);
    auto tc = step_rows(cell_tanh, step, s.steps, s.batch);
    c.array() = z.middleCols(H, H).array() * c_prev.array() +
                z.leftCols(H).array() * z.middleCols(2 * H, H).array();
    tc = c;
    tanh_inplace(tc);
    h_prev.array() = z.rightCols(H).array() * tc.array();
    step_rows(hid, step, s.steps, s.batch) = h_prev;
    c_prev = c;
  }

  Tensor last({s.batch, s.hidden});
  last.matrix() = h_prev;
  if (cache) {
    cache->batch = s.batch;
    cache->input = std::move(flat_input);
    cache->gates = std::move(gates);
    cache->cell = std::move(cell);
    cache->cell_tanh = std::move(cell_tanh);
    cache->hidden = std::move(hid);
  }
  return last;
}

LstmGradients lstm_backward_batch(const Tensor& grad_last_hidden, const LstmCache& cache,
                                  const Tensor& input_weights, const Tensor& recurrent_weights) {
  if (!cache.valid()) throw StateError("lstm_backward called without a forward cache");
  const auto batch = cache.batch;
  const auto rows = cache.gates.dim(0);
  const auto steps = rows / batch;
  const auto hidden = cache.cell.dim(1);
  const auto in_features = cache.input.dim(1);
  expect_shape(grad_last_hidden, {batch, hidden}, "lstm grad_last_hidden");
  expect_shape(recurrent_weights, {hidden, 4 * hidden}, "lstm recurrent weights");
  expect_shape(input_weights, {in_features, 4 * hidden}, "lstm input weights");

  const auto H = static_cast<Eigen::Index>(hidden);
  const auto B = static_cast<Eigen::Index>(batch);
  const auto& gates = cache.gates;
  const auto& cell = cache.cell;
  const auto& cell_tanh = cache.cell_tanh;
  const auto u = recurrent_weights.matrix();

  Tensor grad_z({rows, 4 * hidden});
  RowMatrix dh = grad_last_hidden.matrix();
  RowMatrix dc = RowMatrix::Zero(B, H);
  Eigen::ArrayXXd dct(B, H);
  for (std::size_t step = steps; step-- > 0;) {
    const auto g = step_rows(gates, step, steps, batch);
    const auto i = g.leftCols(H).array();
    const auto f = g.middleCols(H, H).array();
    const auto cand = g.middleCols(2 * H, H).array();
    const auto o = g.rightCols(H).array();
    const auto tc = step_rows(cell_tanh, step, steps, batch).array();

    dct = dc.array() + dh.array() * o * (1.0 - tc.square());
    auto dz = step_rows(grad_z, step, steps, batch);
    dz.leftCols(H).array() = dct * cand * i * (1.0 - i);
    if (step > 0) {
      dz.middleCols(H, H).array() =
          dct * step_rows(cell, step - 1, steps, batch).array() * f * (1.0 - f);
    } else {
      dz.middleCols(H, H).setZero();
    }
    dz.middleCols(2 * H, H).array() = dct * i * (1.0 - cand.square());
    dz.rightCols(H).array() = dh.array() * tc * o * (1.0 - o);

    dc.array() = dct * f;
    dh.noalias() = dz * u.transpose();
  }

  const auto dz = grad_z.matrix();
  LstmGradients out;
  out.input_weights = Tensor(input_weights.shape());
  out.input_weights.matrix().noalias() = cache.input.matrix().transpose() * dz;
  out.bias = Tensor({4 * hidden});
  out.bias.vector() = dz.colwise().sum().transpose();
  out.recurrent_weights = Tensor(recurrent_weights.shape());
  if (steps > 1) {
    const auto n = static_cast<Eigen::Index>(steps - 1);
    const auto T = static_cast<Eigen::Index>(steps);
    for (Eigen::Index b = 0; b < B; ++b) {
      out.recurrent_weights.matrix().noalias() +=
          cache.hidden.matrix().middleRows(b * T, n).transpose() * dz.middleRows(b * T + 1, n);
    }
  }
  out.input = Tensor({batch, steps, in_features});
  out.input.matrix().noalias() = dz * input_weights.matrix().transpose();
  return out;
}

Tensor lstm_forward(const Tensor& input, const Tensor& input_weights,
                    const Tensor& recurrent_weights, const Tensor& bias, LstmCache* cache) {
  expect_rank(input, 2, "lstm input");
  const Tensor batched({1, input.dim(0), input.dim(1)}, input.values());
  const Tensor last = lstm_forward_batch(batched, input_weights, recurrent_weights, bias, cache);
  return Tensor({last.size()}, last.values());
}

LstmGradients lstm_backward(const Tensor& grad_last_hidden, const LstmCache& cache,
                            const Tensor& input_weights, const Tensor& recurrent_weights) {
  if (!cache.valid()) throw StateError("lstm_backward called without a forward cache");
  if (cache.batch != 1) throw StateError("lstm_backward given a batched cache");
  expect_rank(grad_last_hidden, 1, "lstm grad_last_hidden");
  const Tensor batched({1, grad_last_hidden.size()}, grad_last_hidden.values());
  auto g = lstm_backward_batch(batched, cache, input_weights, recurrent_weights);
  g.input = Tensor({g.input.dim(1), g.input.dim(2)}, g.input.values());
  return g;
}

// ---- Dense ----------------------------------------------------------------

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                     Activation act, DenseCache* cache) {
  expect_rank(input, 1, "dense input");
  expect_rank(weights, 2, "dense weights");
  if (weights.dim(0) != input.dim(0)) {
    throw DimensionError("dense: input of length " + std::to_string(input.dim(0)) +
                         " does not match weights " + dims(weights.dim(0), weights.dim(1)));
  }
  expect_shape(bias, {weights.dim(1)}, "dense bias");

  Tensor out({weights.dim(1)});
  out.vector().noalias() = weights.matrix().transpose() * input.vector();
  out.vector() += bias.vector();
  apply_activation(act, out);
  if (cache) {
    cache->input = input;
    cache->output = out;
    cache->activation = act;
  }
  return out;
}

LayerGradients dense_backward(const Tensor& grad_out, const DenseCache& cache,
                              const Tensor& weights) {
  if (!cache.valid()) throw StateError("dense_backward called without a forward cache");
  expect_shape(grad_out, cache.output.shape(), "dense grad_out");
  expect_shape(weights, {cache.input.dim(0), cache.output.dim(0)}, "dense weights");

  Tensor delta = grad_out;
  scale_by_activation_derivative(cache.activation, cache.output, delta);

  LayerGradients g;
  g.weights = Tensor(weights.shape());
  g.weights.matrix().noalias() = cache.input.vector() * delta.vector().transpose();
  g.bias = delta;
  g.input = Tensor(cache.input.shape());
  g.input.vector().noalias() = weights.matrix() * delta.vector();
  return g;
}

}  // namespace wristnet
