#include "wristnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "wristnet/errors.hpp"

namespace wristnet {

namespace {

// Distinct stream for batch shuffling so it never aliases weight init.
constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;

void expect_window(const Tensor& w, const char* what) {
  expect_shape(w, {kWindowLength, kAxes}, what);
}

std::pair<std::size_t, std::size_t> count_classes(const std::vector<double>& labels) {
  std::size_t neg = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0.0) {
      ++neg;
    } else if (labels[i] == 1.0) {
      ++pos;
    } else {
      throw ValidationError("label " + std::to_string(labels[i]) + " at index " +
                            std::to_string(i) + " is not 0 or 1");
    }
  }
  return {neg, pos};
}

double mean_loss(const Network& net, const SampleSet& set, LossKind kind) {
  Tensor preds({set.size()});
  for (std::size_t i = 0; i < set.size(); ++i) preds[i] = net.forward(set.inputs[i]);
  return loss(preds, Tensor({set.size()}, set.targets), kind).value;
}

}  // namespace

void validate(const ModelConfig& c) {
  if (c.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (c.patience < 1) throw ValidationError("patience must be >= 1");
  if (c.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  validate(c.adam);
}

ClassWeights class_weights(const std::vector<double>& labels) {
  const auto [neg, pos] = count_classes(labels);
  if (neg == 0 || pos == 0) {
    throw DegenerateLabelsError("class weights need both classes; got " + std::to_string(neg) +
                                " negatives and " + std::to_string(pos) + " positives");
  }
  const auto n = static_cast<double>(labels.size());
  return {n / (2.0 * static_cast<double>(neg)), n / (2.0 * static_cast<double>(pos))};
}

SampleSet downsample_majority(const SampleSet& samples, std::uint64_t seed) {
  const auto [neg, pos] = count_classes(samples.targets);
  if (neg == 0 || pos == 0) {
    throw DegenerateLabelsError("cannot balance a single-class sample set (" +
                                std::to_string(neg) + " negatives, " + std::to_string(pos) +
                                " positives)");
  }
  if (neg == pos) return samples;

  const double majority_label = neg > pos ? 0.0 : 1.0;
  std::vector<std::size_t> majority;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples.targets[i] == majority_label) majority.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(majority.begin(), majority.end(), rng);
  majority.resize(std::min(neg, pos));

  std::vector<bool> keep(samples.size(), false);
  for (std::size_t i = 0; i < samples.size(); ++i) keep[i] = samples.targets[i] != majority_label;
  for (auto i : majority) keep[i] = true;

  SampleSet out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) out.add(samples.inputs[i], samples.targets[i]);
  }
  return out;
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw ValidationError("patience must be >= 1");
}

bool EarlyStopping::update(double loss) {
  ++epochs_;
  improved_ = epochs_ == 1 || loss < best_loss_;
  if (improved_) {
    best_loss_ = loss;
    best_epoch_ = epochs_;
    wait_ = 0;
  } else {
    ++wait_;
  }
  return wait_ >= patience_;
}

TrainedModel train(const SampleSet& train_set, const SampleSet& val_set, const ModelConfig& config) {
  return train(build_network(config.task, config.seed), train_set, val_set, config);
}

TrainedModel train(Network initial, const SampleSet& train_set, const SampleSet& val_set,
                   const ModelConfig& config) {
  validate(config);
  if (train_set.empty()) throw ValidationError("training set is empty");
  if (val_set.empty()) throw ValidationError("validation set is empty");
  for (const auto& w : train_set.inputs) expect_window(w, "training window");
  for (const auto& w : val_set.inputs) expect_window(w, "validation window");

  const bool classify = is_classification(config.task);
  const auto kind = loss_kind(config.task);

  TrainedModel model;
  model.config = config;
  model.network = std::move(initial);

  SampleSet train_z = train_set;
  SampleSet val_z = val_set;
  Tensor weights({train_set.size()}, 1.0);
  if (classify) {
    const auto cw = class_weights(train_set.targets);
    for (std::size_t i = 0; i < train_set.size(); ++i) {
      weights[i] = train_set.targets[i] == 1.0 ? cw.positive : cw.negative;
    }
    const auto [neg, pos] = count_classes(val_set.targets);
    if (neg > 0 && pos > 0) {
      val_z = downsample_majority(val_set, config.seed);
      model.validation_downsampled = true;
    }
  } else if (config.standardize_targets) {
    const auto& y = train_set.targets;
    const double n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / n);
    model.scaling = {mean, sd > 0.0 ? sd : 1.0};
    for (auto& v : train_z.targets) v = (v - mean) / model.scaling.scale;
    for (auto& v : val_z.targets) v = (v - mean) / model.scaling.scale;
  }
  const double loss_unit = model.scaling.scale * model.scaling.scale;

  auto& net = model.network;
  NetworkParameters best = net.parameters();
  EarlyStopping stopper(config.patience);
  std::mt19937_64 rng(config.seed ^ kShuffleStream);
  std::vector<std::size_t> order(train_z.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);
  BatchTrace trace;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += batch, ++batch_index) {
      const auto n = std::min(batch, order.size() - start);
      std::vector<const Tensor*> inputs(n);
      Tensor targets({n});
      Tensor w({n});
      for (std::size_t j = 0; j < n; ++j) {
        const auto idx = order[start + j];
        inputs[j] = &train_z.inputs[idx];
        targets[j] = train_z.targets[idx];
        w[j] = weights[idx];
      }
      LossResult lr;
      try {
        const auto out = net.forward_batch(inputs, &trace);
        lr = loss(Tensor({n}, out), targets, kind, &w);
        if (!std::isfinite(lr.value)) throw NumericError("loss is not finite");
        auto grads = net.parameters().zero_gradients();
        net.backward_batch(trace, lr.grad.values(), grads);
        adam_step(net.parameters(), grads, config.adam);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_index) + ")");
      }
      loss_sum += lr.value * static_cast<double>(n);
    }

    EpochRecord rec;
    rec.train_loss = loss_unit * loss_sum / static_cast<double>(order.size());
    rec.val_loss = loss_unit * mean_loss(net, val_z, kind);
    if (!std::isfinite(rec.val_loss)) {
      throw NumericError("validation loss is not finite (epoch " + std::to_string(epoch) + ")");
    }
    model.history.push_back(rec);
    const bool stop = stopper.update(rec.val_loss);
    if (stopper.improved()) best = net.parameters();
    if (stop) break;
  }

  net.parameters() = std::move(best);
  model.stopped_epoch = static_cast<int>(model.history.size());
  model.best_epoch = stopper.best_epoch();
  return model;
}

double predict_one(const TrainedModel& model, const Tensor& window) {
  expect_window(window, "prediction window");
  const double out = model.network.forward(window);
  if (is_classification(model.config.task)) return out;
  return out * model.scaling.scale + model.scaling.mean;
}

Tensor predict(const TrainedModel& model, const std::vector<Tensor>& windows) {
  if (windows.empty()) throw ValidationError("no windows to predict");
  Tensor out({windows.size()});
  for (std::size_t i = 0; i < windows.size(); ++i) out[i] = predict_one(model, windows[i]);
  return out;
}

}  // namespace wristnet
