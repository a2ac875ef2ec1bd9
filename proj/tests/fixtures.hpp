#pragma once

// Generated inputs shared by the unit tests and the acceptance binary.

#include <vector>

#include <string>

#include "spectrascreen/cnn.hpp"
#include "spectrascreen/rng.hpp"
#include "spectrascreen/types.hpp"

namespace spectrascreen::fixture {

struct BaselineCase {
  Vector signal;
  Vector baseline;
  std::vector<bool> off_peak;  // farther than 4 widths from every peak
  double baseline_amplitude = 0.0;  // max |b| of the true baseline
};

// Quadratic baseline plus 1-3 Gaussian peaks plus white noise whose sigma is
// at most 0.5% of the smallest peak height.
BaselineCase baseline_case(Rng& rng, Eigen::Index n = 874, int min_peaks = 1,
                           int max_peaks = 3);

// Off-peak RMSE of `estimate` against the true baseline.
double off_peak_rmse(const BaselineCase& c, const Vector& estimate);

struct PlsProblem {
  Matrix x;
  Vector y;
  int n_components = 1;
};

// Random PLS-1 instance with rows <= max_rows, cols <= max_cols and a binary
// response carrying some signal. n_components <= min(P - 1, M, max_n).
PlsProblem pls_problem(Rng& rng, int max_rows = 10, int max_cols = 8,
                       int max_n = 4);

// Largest |a - s b| over entries with s = +-1 chosen per column.
double max_abs_diff_up_to_sign(const Matrix& a, const Matrix& b);

struct GradientCheck {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  std::size_t checked = 0;
  // Parameters whose +-h perturbation flips a rectifier or a max-pool argmax;
  // the loss is not differentiable across such a kink, so they are skipped.
  std::size_t skipped = 0;
  std::vector<std::size_t> checked_per_tensor;
};

// Central differences with step h on up to `per_tensor` randomly chosen
// entries of every parameter tensor (all entries of smaller tensors).
// Relative error is |a - n| / max(|a|, |n|, floor).
GradientCheck gradient_check(const AttentionCnnModel& model, const Matrix& x,
                             const std::vector<int>& labels, Rng& rng,
                             std::size_t per_tensor, double h = 1e-5,
                             double floor = 1e-6);

// Name of tensor `index` in CnnParameters::tensors() order.
std::string tensor_name(const CnnArchitecture& arch, std::size_t index);

// A random default-architecture model with nonzero biases and a batch of
// inputs and labels.
struct GradientCase {
  AttentionCnnModel model;
  Matrix x;
  std::vector<int> labels;
};
GradientCase gradient_case(std::uint64_t seed, Eigen::Index batch = 3);

}  // namespace spectrascreen::fixture
