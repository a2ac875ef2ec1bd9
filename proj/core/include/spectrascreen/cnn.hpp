#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spectrascreen/types.hpp"

namespace spectrascreen {

// Conv stack with "same" padding and stride 1, a squeeze-excitation block on
// the last conv output, and one affine classifier over the flattened map.
struct CnnArchitecture {
  int input_len = 24;
  std::vector<int> channels{16, 32, 64};
  int kernel_len = 3;
  int reduction_ratio = 16;
  int n_classes = 2;

  void validate() const;
  int attended_channels() const { return channels.back(); }
  int squeeze_dim() const { return attended_channels() / reduction_ratio; }
  int flat_features() const { return attended_channels() * input_len; }

  bool operator==(const CnnArchitecture&) const = default;
};

struct ConvParams {
  Matrix kernel;  // out x (in * kernel_len); column = in_channel * K + tap
  Vector bias;    // out
};

struct CnnParameters {
  std::vector<ConvParams> conv;
  Matrix excite_down;  // W_e1, (C / r) x C, no bias
  Matrix excite_up;    // W_e2, C x (C / r), no bias
  Matrix fc_weight;    // classes x (C * L); column = channel * L + position
  Vector fc_bias;      // classes

  // Same shapes, all zero.
  static CnnParameters zeros_like(const CnnParameters& other);

  // Flat views over every tensor in a fixed order.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;
  std::size_t count() const;
};

struct AttentionCnnModel {
  CnnArchitecture arch;
  CnnParameters params;
  std::uint64_t seed = 0;
};

// Conv and classifier weights ~ U(-b, b) with b = sqrt(6 / fan_in) for the
// rectified conv layers and b = 1 / sqrt(fan_in) for the excitation and
// classifier layers. Biases start at zero.
AttentionCnnModel model_init(const CnnArchitecture& arch, std::uint64_t seed);

// Cross-correlation of a C_in x L map with zero padding kernel_len / 2 on each
// side, plus bias. conv_forward additionally applies the rectifier.
Matrix conv_preactivation(const Matrix& x, const ConvParams& layer,
                          int kernel_len);
Matrix conv_forward(const Matrix& x, const ConvParams& layer, int kernel_len);

struct AttentionOutput {
  Vector v_avg;    // per-channel mean over positions
  Vector v_max;    // per-channel max over positions
  Vector w_avg;    // sigmoid(W_e2 relu(W_e1 v_avg))
  Vector w_max;    // sigmoid(W_e2 relu(W_e1 v_max))
  Vector w_total;  // w_avg + w_max, each entry in (0, 2)
  Matrix scaled;   // row i of the input times w_total(i)
};

AttentionOutput channel_attention(const Matrix& u, const Matrix& excite_down,
                                  const Matrix& excite_up);

// Intermediate maps of one sample, kept for inspection and tests.
struct ForwardCache {
  std::vector<Matrix> conv_outputs;  // rectified output of each conv layer
  AttentionOutput attention;
  Vector flat;
};

Vector forward(const AttentionCnnModel& model, const Vector& scores,
               ForwardCache* cache = nullptr);

struct LossAndGrad {
  double loss = 0.0;  // mean softmax cross-entropy
  CnnParameters grads;
  std::size_t correct = 0;  // argmax hits, for accuracy bookkeeping
};

// x is B x input_len; rows are samples.
LossAndGrad loss_and_grad(const AttentionCnnModel& model, const Matrix& x,
                          std::span<const int> labels);

double mean_cross_entropy(const AttentionCnnModel& model, const Matrix& x,
                          std::span<const int> labels);

// Row-wise softmax of the logits; column 1 is the positive class.
Matrix predict_proba(const AttentionCnnModel& model, const Matrix& x);

}  // namespace spectrascreen
