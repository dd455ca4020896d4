#include <cmath>
#include <random>

#include "doctest.h"
#include "support/gradcheck.hpp"
#include "wristnet/errors.hpp"
#include "wristnet/layers.hpp"

using namespace wristnet;
using wristnet::testing::random_tensor;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Direct nested-loop convolution with the same padding rule.
Tensor conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t T = x.dim(0), C = x.dim(1), K = w.dim(0), O = w.dim(2);
  const long pad = static_cast<long>((K - 1) / 2);
  Tensor out({T, O});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t o = 0; o < O; ++o) {
      double acc = b[o];
      for (std::size_t k = 0; k < K; ++k) {
        const long src = static_cast<long>(t + k) - pad;
        if (src < 0 || src >= static_cast<long>(T)) continue;
        for (std::size_t c = 0; c < C; ++c) acc += x.at(src, c) * w.at(k, c, o);
      }
      out.at(t, o) = acc;
    }
  }
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("core-nn") {

TEST_CASE("parameter counts of the reference layers") {
  CHECK(parameter_count({LayerKind::Conv1D, 3, 16, 8, Activation::ReLU}) == 400);
  CHECK(parameter_count({LayerKind::Conv1D, 16, 32, 8, Activation::ReLU}) == 4128);
  CHECK(parameter_count({LayerKind::Conv1D, 32, 64, 8, Activation::ReLU}) == 16448);
  CHECK(parameter_count({LayerKind::LSTM, 64, 50, 0, Activation::Tanh}) == 23000);
  CHECK(parameter_count({LayerKind::Dense, 50, 10, 0, Activation::ReLU}) == 510);
  CHECK(parameter_count({LayerKind::Dense, 10, 1, 0, Activation::Sigmoid}) == 11);
}

TEST_CASE("conv1d identity kernel") {
  std::mt19937_64 rng(1);
  const Tensor x = random_tensor({9, 1}, rng);
  Conv1DCache cache;
  const Tensor y = conv1d_forward(x, Tensor({1, 1, 1}, 1.0), Tensor({1}), Activation::Linear, &cache);
  CHECK(y == x);
  const Tensor up = random_tensor({9, 1}, rng);
  CHECK(conv1d_backward(up, cache, Tensor({1, 1, 1}, 1.0)).input == up);
}

TEST_CASE("conv1d matches direct summation") {
  std::mt19937_64 rng(2);
  for (std::size_t k : {1, 2, 3, 4, 8}) {
    const Tensor x = random_tensor({12, 2}, rng);
    const Tensor w = random_tensor({k, 2, 4}, rng);
    const Tensor b = random_tensor({4}, rng);
    CHECK(max_abs_diff(conv1d_forward(x, w, b, Activation::Linear), conv_oracle(x, w, b)) < 1e-12);
  }
}

TEST_CASE("conv1d keeps length on a window") {
  const Tensor y = conv1d_forward(Tensor({450, 3}), Tensor({8, 3, 16}), Tensor({16}), Activation::ReLU);
  CHECK(y.shape() == std::vector<std::size_t>{450, 16});
}

TEST_CASE("conv1d errors") {
  CHECK_THROWS_AS(conv1d_forward(Tensor({5, 2}), Tensor({3, 3, 1}), Tensor({1}), Activation::Linear),
                  DimensionError);
  CHECK_THROWS_AS(conv1d_backward(Tensor({5, 1}), Conv1DCache{}, Tensor({3, 2, 1})), StateError);
}

TEST_CASE("conv1d zero upstream gives zero gradients") {
  std::mt19937_64 rng(3);
  const Tensor w = random_tensor({3, 2, 4}, rng);
  Conv1DCache cache;
  conv1d_forward(random_tensor({7, 2}, rng), w, random_tensor({4}, rng), Activation::Tanh, &cache);
  const auto g = conv1d_backward(Tensor({7, 4}), cache, w);
  CHECK(g.input == Tensor({7, 2}));
  CHECK(g.weights == Tensor({3, 2, 4}));
  CHECK(g.bias == Tensor({4}));
}

TEST_CASE("conv1d finite differences") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto r = testing::check_conv1d(seed);
    CHECK(r.checked >= 50);
    CHECK(r.max_rel_error < testing::kFdTolerance);
  }
}

TEST_CASE("lstm with zero parameters outputs zeros") {
  std::mt19937_64 rng(4);
  const Tensor h = lstm_forward(random_tensor({6, 3}, rng), Tensor({3, 8}), Tensor({2, 8}), Tensor({8}));
  CHECK(h == Tensor({2}));
}

TEST_CASE("lstm scalar recurrence unrolled by hand") {
  // C_in = H = 1, gates ordered i, f, g, o.
  const double wi = 0.5, wf = -0.3, wg = 0.8, wo = 0.2;
  const double ui = 0.1, uf = 0.4, ug = -0.6, uo = 0.9;
  const double bi = 0.05, bf = 1.0, bg = -0.1, bo = 0.3;
  const double x1 = 0.7, x2 = -1.2;

  double h = 0.0, c = 0.0;
  for (double x : {x1, x2}) {
    const double i = sigmoid(wi * x + ui * h + bi);
    const double f = sigmoid(wf * x + uf * h + bf);
    const double g = std::tanh(wg * x + ug * h + bg);
    const double o = sigmoid(wo * x + uo * h + bo);
    c = f * c + i * g;
    h = o * std::tanh(c);
  }

  const Tensor out = lstm_forward(Tensor({2, 1}, {x1, x2}), Tensor({1, 4}, {wi, wf, wg, wo}),
                                  Tensor({1, 4}, {ui, uf, ug, uo}), Tensor({4}, {bi, bf, bg, bo}));
  CHECK(out[0] == doctest::Approx(h).epsilon(1e-14));
}

TEST_CASE("lstm single step matches closed-form gradients") {
  std::mt19937_64 rng(5);
  const std::size_t C = 2, H = 3;
  const Tensor x = random_tensor({1, C}, rng);
  const Tensor W = random_tensor({C, 4 * H}, rng);
  const Tensor U = random_tensor({H, 4 * H}, rng);
  const Tensor b = random_tensor({4 * H}, rng);
  const Tensor dh = random_tensor({H}, rng);

  LstmCache cache;
  lstm_forward(x, W, U, b, &cache);
  const auto g = lstm_backward(dh, cache, W, U);

  // With h_0 = c_0 = 0: c = i g, h = o tanh(c). The forget gate and U get no gradient.
  Tensor dz({4 * H});
  for (std::size_t j = 0; j < H; ++j) {
    double z[4];
    for (std::size_t q = 0; q < 4; ++q) {
      z[q] = b[q * H + j];
      for (std::size_t c = 0; c < C; ++c) z[q] += x[c] * W.at(c, q * H + j);
    }
    const double i = sigmoid(z[0]), gg = std::tanh(z[2]), o = sigmoid(z[3]);
    const double cell = i * gg, tc = std::tanh(cell);
    const double dc = dh[j] * o * (1.0 - tc * tc);
    dz[j] = dc * gg * i * (1.0 - i);
    dz[H + j] = 0.0;
    dz[2 * H + j] = dc * i * (1.0 - gg * gg);
    dz[3 * H + j] = dh[j] * tc * o * (1.0 - o);
  }
  for (std::size_t q = 0; q < 4 * H; ++q) {
    CHECK(g.bias[q] == doctest::Approx(dz[q]).epsilon(1e-12));
    for (std::size_t c = 0; c < C; ++c) {
      CHECK(g.input_weights.at(c, q) == doctest::Approx(x[c] * dz[q]).epsilon(1e-12));
    }
  }
  CHECK(g.recurrent_weights == Tensor({H, 4 * H}));
  for (std::size_t c = 0; c < C; ++c) {
    double expect = 0.0;
    for (std::size_t q = 0; q < 4 * H; ++q) expect += W.at(c, q) * dz[q];
    CHECK(g.input.at(0, c) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("lstm zero upstream gives zero gradients") {
  std::mt19937_64 rng(6);
  const Tensor W = random_tensor({3, 8}, rng), U = random_tensor({2, 8}, rng);
  LstmCache cache;
  lstm_forward(random_tensor({5, 3}, rng), W, U, random_tensor({8}, rng), &cache);
  const auto g = lstm_backward(Tensor({2}), cache, W, U);
  CHECK(g.input == Tensor({5, 3}));
  CHECK(g.input_weights == Tensor({3, 8}));
  CHECK(g.recurrent_weights == Tensor({2, 8}));
  CHECK(g.bias == Tensor({8}));
}

TEST_CASE("lstm finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = testing::check_lstm(seed, 6);
    CHECK(r.checked >= 100);
    CHECK(r.max_rel_error < testing::kFdTolerance);
  }
}

TEST_CASE("lstm batch agrees with single sequences") {
  std::mt19937_64 rng(7);
  const std::size_t B = 3, T = 7, C = 2, H = 4;
  const Tensor x = random_tensor({B, T, C}, rng);
  const Tensor W = random_tensor({C, 4 * H}, rng), U = random_tensor({H, 4 * H}, rng);
  const Tensor b = random_tensor({4 * H}, rng), dh = random_tensor({B, H}, rng);

  LstmCache batch_cache;
  const Tensor hb = lstm_forward_batch(x, W, U, b, &batch_cache);
  const auto gb = lstm_backward_batch(dh, batch_cache, W, U);

  Tensor sum_w({C, 4 * H}), sum_u({H, 4 * H}), sum_b({4 * H});
  for (std::size_t s = 0; s < B; ++s) {
    Tensor xs({T, C});
    for (std::size_t i = 0; i < T * C; ++i) xs[i] = x[s * T * C + i];
    Tensor dhs({H});
    for (std::size_t j = 0; j < H; ++j) dhs[j] = dh.at(s, j);
    LstmCache cache;
    const Tensor h = lstm_forward(xs, W, U, b, &cache);
    const auto g = lstm_backward(dhs, cache, W, U);
    for (std::size_t j = 0; j < H; ++j) CHECK(hb.at(s, j) == doctest::Approx(h[j]).epsilon(1e-13));
    for (std::size_t i = 0; i < T * C; ++i) {
      CHECK(gb.input[s * T * C + i] == doctest::Approx(g.input[i]).epsilon(1e-12));
    }
    sum_w.vector() += g.input_weights.vector();
    sum_u.vector() += g.recurrent_weights.vector();
    sum_b.vector() += g.bias.vector();
  }
  CHECK(max_abs_diff(gb.input_weights, sum_w) < 1e-12);
  CHECK(max_abs_diff(gb.recurrent_weights, sum_u) < 1e-12);
  CHECK(max_abs_diff(gb.bias, sum_b) < 1e-12);
}

TEST_CASE("lstm errors") {
  CHECK_THROWS_AS(lstm_forward(Tensor({4, 3}), Tensor({2, 8}), Tensor({2, 8}), Tensor({8})), DimensionError);
  CHECK_THROWS_AS(lstm_backward(Tensor({2}), LstmCache{}, Tensor({3, 8}), Tensor({2, 8})), StateError);
}

TEST_CASE("dense matches a matrix product") {
  std::mt19937_64 rng(8);
  const Tensor x = random_tensor({4}, rng), W = random_tensor({4, 3}, rng), b = random_tensor({3}, rng);
  const Tensor y = dense_forward(x, W, b, Activation::Linear);
  for (std::size_t o = 0; o < 3; ++o) {
    double acc = b[o];
    for (std::size_t i = 0; i < 4; ++i) acc += x[i] * W.at(i, o);
    CHECK(std::abs(y[o] - acc) < 1e-12);
  }
}

TEST_CASE("dense identity and bilinear gradient") {
  std::mt19937_64 rng(9);
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  const Tensor x = random_tensor({3}, rng);
  DenseCache cache;
  CHECK(dense_forward(x, eye, Tensor({3}), Activation::Linear, &cache) == x);

  const Tensor up = random_tensor({3}, rng);
  const auto g = dense_backward(up, cache, eye);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t o = 0; o < 3; ++o) CHECK(g.weights.at(i, o) == x[i] * up[o]);
  }
  CHECK(g.bias == up);

  const auto zero = dense_backward(Tensor({3}), cache, eye);
  CHECK(zero.input == Tensor({3}));
  CHECK(zero.weights == Tensor({3, 3}));
}

TEST_CASE("dense finite differences") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto r = testing::check_dense(seed);
    CHECK(r.checked >= 100);
    CHECK(r.max_rel_error < testing::kFdTolerance);
  }
}

TEST_CASE("dense errors") {
  CHECK_THROWS_AS(dense_forward(Tensor({5}), Tensor({4, 2}), Tensor({2}), Activation::Linear), DimensionError);
  CHECK_THROWS_AS(dense_backward(Tensor({2}), DenseCache{}, Tensor({4, 2})), StateError);
}

TEST_CASE("activations") {
  Tensor t({4}, {-2.0, 0.0, 0.5, 3.0});
  Tensor r = t;
  apply_activation(Activation::ReLU, r);
  CHECK(r == Tensor({4}, {0.0, 0.0, 0.5, 3.0}));
  Tensor s = t;
  apply_activation(Activation::Sigmoid, s);
  CHECK(s[1] == 0.5);
  CHECK(s[3] == doctest::Approx(sigmoid(3.0)));
  Tensor big({2}, {-800.0, 800.0});
  apply_activation(Activation::Sigmoid, big);
  CHECK(big.all_finite());
}

}  // TEST_SUITE
