#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wristnet/network.hpp"
#include "wristnet/optimizer.hpp"

namespace wristnet {

struct ModelConfig {
  Task task = Task::Sedentary;
  int epochs = 50;
  int patience = 5;
  int batch_size = 32;
  std::uint64_t seed = 0;
  AdamConfig adam;
  // Regression only: train on z-scored targets, fitted on the training set.
  bool standardize_targets = true;
};

void validate(const ModelConfig& config);

// Windows with one target each (0/1 for classification, MET for regression).
struct SampleSet {
  std::vector<Tensor> inputs;
  std::vector<double> targets;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
  void add(Tensor input, double target) {
    inputs.push_back(std::move(input));
    targets.push_back(target);
  }
};

struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;
};

// Inverse-frequency weights w_c = N / (2 N_c).
ClassWeights class_weights(const std::vector<double>& labels);

// Randomly drops majority-class samples until both classes are equally
// represented. Minority samples are all kept and relative order is preserved.
SampleSet downsample_majority(const SampleSet& samples, std::uint64_t seed);

// Patience counter on a monitored loss; improvement means strictly lower.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  // Records the next epoch's loss. Returns true once `patience` consecutive
  // epochs have passed without improvement.
  bool update(double loss);
  bool improved() const { return improved_; }
  int best_epoch() const { return best_epoch_; }  // 1-based, 0 before any update
  double best_loss() const { return best_loss_; }
  int epochs_seen() const { return epochs_; }

 private:
  int patience_;
  int epochs_ = 0;
  int wait_ = 0;
  int best_epoch_ = 0;
  double best_loss_ = 0.0;
  bool improved_ = false;
};

struct EpochRecord {
  double train_loss = 0.0;
  double val_loss = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

// Affine map from network output to reported value (identity for
// classification).
struct TargetScaling {
  double mean = 0.0;
  double scale = 1.0;

  friend bool operator==(const TargetScaling&, const TargetScaling&) = default;
};

struct TrainedModel {
  ModelConfig config;
  Network network;
  TargetScaling scaling;
  std::vector<EpochRecord> history;
  int stopped_epoch = 0;
  int best_epoch = 0;
  bool validation_downsampled = false;
};

// Mini-batch Adam training with per-epoch validation, early stopping and
// best-epoch restore. Classification uses class-weighted BCE and monitors a
// majority-downsampled copy of `val`; regression uses unweighted MSE.
TrainedModel train(const SampleSet& train_set, const SampleSet& val_set, const ModelConfig& config);

// Continues from an existing network instead of a fresh initialization.
TrainedModel train(Network initial, const SampleSet& train_set, const SampleSet& val_set,
                   const ModelConfig& config);

// Classification: probabilities. Regression: MET estimates.
Tensor predict(const TrainedModel& model, const std::vector<Tensor>& windows);
double predict_one(const TrainedModel& model, const Tensor& window);

}  // namespace wristnet
