#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spectrascreen/cnn.hpp"
#include "spectrascreen/types.hpp"

namespace spectrascreen {

// Full-batch Adam on mean softmax cross-entropy.
struct TrainConfig {
  double learning_rate = 2e-4;
  int epochs = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;  // model initialization seed

  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

// One entry per epoch, measured on the parameters entering that epoch's step.
// The test series stay empty unless a held-out set is supplied.
struct TrainHistory {
  std::vector<double> loss;
  std::vector<double> accuracy;
  std::vector<double> test_loss;
  std::vector<double> test_accuracy;
};

struct TrainResult {
  AttentionCnnModel model;
  TrainHistory history;
};

struct HeldOut {
  const Matrix* x = nullptr;
  std::span<const int> labels;
};

TrainResult train(AttentionCnnModel model, const Matrix& scores,
                  std::span<const int> labels, const TrainConfig& cfg,
                  HeldOut held_out = {});

}  // namespace spectrascreen
