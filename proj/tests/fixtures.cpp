#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spectrascreen::fixture {

BaselineCase baseline_case(Rng& rng, Eigen::Index n, int min_peaks,
                           int max_peaks) {
  BaselineCase c;
  c.baseline.resize(n);
  c.signal.resize(n);
  const double a0 = rng.uniform(0.2, 1.0);
  const double a1 = rng.uniform(-0.3, 0.3);
  const double a2 = rng.uniform(-0.3, 0.3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
    c.baseline(i) = a0 + a1 * x + a2 * x * x;
  }
  c.baseline_amplitude = c.baseline.cwiseAbs().maxCoeff();

  const int peaks = min_peaks + static_cast<int>(rng.below(
                                    static_cast<std::uint64_t>(max_peaks - min_peaks + 1)));
  c.off_peak.assign(static_cast<std::size_t>(n), true);
  Vector peak_sum = Vector::Zero(n);
  double min_height = 1e300;
  for (int p = 0; p < peaks; ++p) {
    const double height = rng.uniform(0.2, 1.0);
    const double width = rng.uniform(4.0, 15.0);
    const double center = rng.uniform(0.1, 0.9) * static_cast<double>(n - 1);
    min_height = std::min(min_height, height);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = (static_cast<double>(i) - center) / width;
      peak_sum(i) += height * std::exp(-0.5 * z * z);
      if (std::abs(z) <= 4.0) c.off_peak[static_cast<std::size_t>(i)] = false;
    }
  }
  const double sigma = rng.uniform(0.0, 0.005) * min_height;
  for (Eigen::Index i = 0; i < n; ++i) {
    c.signal(i) = c.baseline(i) + peak_sum(i) + sigma * rng.normal();
  }
  return c;
}

double off_peak_rmse(const BaselineCase& c, const Vector& estimate) {
  double ss = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < estimate.size(); ++i) {
    if (!c.off_peak[static_cast<std::size_t>(i)]) continue;
    const double d = estimate(i) - c.baseline(i);
    ss += d * d;
    ++count;
  }
  return std::sqrt(ss / static_cast<double>(count));
}

PlsProblem pls_problem(Rng& rng, int max_rows, int max_cols, int max_n) {
  PlsProblem p;
  const int rows = 3 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_rows - 2)));
  const int cols = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_cols - 1)));
  p.x.resize(rows, cols);
  p.y.resize(rows);
  for (int r = 0; r < rows; ++r) {
    p.y(r) = r % 2;
    for (int c = 0; c < cols; ++c) {
      p.x(r, c) = rng.normal() + (c % 3 == 0 ? 0.8 * p.y(r) : 0.0);
    }
  }
  const int cap = std::min({rows - 1, cols, max_n});
  p.n_components = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cap)));
  return p;
}

double max_abs_diff_up_to_sign(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double plus = (a.col(c) - b.col(c)).cwiseAbs().maxCoeff();
    const double minus = (a.col(c) + b.col(c)).cwiseAbs().maxCoeff();
    worst = std::max(worst, std::min(plus, minus));
  }
  return worst;
}

}  // namespace spectrascreen::fixture

namespace spectrascreen::fixture {
namespace {

// Rectifier masks of every conv layer, max-pool argmax per channel and the
// excitation hidden-unit masks of both pooling branches, for every sample.
std::vector<int> activation_pattern(const AttentionCnnModel& model, const Matrix& x) {
  std::vector<int> sig;
  for (Eigen::Index b = 0; b < x.rows(); ++b) {
    ForwardCache cache;
    forward(model, x.row(b).transpose(), &cache);
    for (const Matrix& out : cache.conv_outputs) {
      for (Eigen::Index i = 0; i < out.size(); ++i) sig.push_back(out.data()[i] > 0.0);
    }
    const Matrix& u = cache.conv_outputs.back();
    for (Eigen::Index c = 0; c < u.rows(); ++c) {
      Eigen::Index arg = 0;
      u.row(c).maxCoeff(&arg);
      sig.push_back(static_cast<int>(arg));
    }
    const Matrix& down = model.params.excite_down;
    for (const Vector* pooled : {&cache.attention.v_avg, &cache.attention.v_max}) {
      const Vector hidden = down * *pooled;
      for (Eigen::Index i = 0; i < hidden.size(); ++i) sig.push_back(hidden(i) > 0.0);
    }
  }
  return sig;
}

}  // namespace

std::string tensor_name(const CnnArchitecture& arch, std::size_t index) {
  const std::size_t conv_tensors = 2 * arch.channels.size();
  if (index < conv_tensors) {
    return "conv" + std::to_string(index / 2 + 1) + (index % 2 == 0 ? ".kernel" : ".bias");
  }
  static const char* tail[] = {"excite_down", "excite_up", "fc_weight", "fc_bias"};
  return tail[index - conv_tensors];
}

GradientCheck gradient_check(const AttentionCnnModel& model, const Matrix& x,
                             const std::vector<int>& labels, Rng& rng,
                             std::size_t per_tensor, double h, double floor) {
  const LossAndGrad analytic = loss_and_grad(model, x, labels);
  const auto grads = analytic.grads.tensors();
  const std::vector<int> base_pattern = activation_pattern(model, x);

  AttentionCnnModel probe = model;
  auto tensors = probe.params.tensors();
  GradientCheck out;
  out.checked_per_tensor.assign(tensors.size(), 0);
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    std::vector<std::size_t> entries;
    const std::size_t size = tensors[t].size();
    if (size <= per_tensor) {
      for (std::size_t i = 0; i < size; ++i) entries.push_back(i);
    } else {
      for (std::size_t i = 0; i < per_tensor; ++i) entries.push_back(rng.below(size));
    }
    for (std::size_t i : entries) {
      double& theta = tensors[t][i];
      const double saved = theta;
      theta = saved + h;
      const bool kink_plus = activation_pattern(probe, x) != base_pattern;
      const double up = mean_cross_entropy(probe, x, labels);
      theta = saved - h;
      const bool kink_minus = activation_pattern(probe, x) != base_pattern;
      const double down = mean_cross_entropy(probe, x, labels);
      theta = saved;
      if (kink_plus || kink_minus) {
        ++out.skipped;
        continue;
      }
      const double numeric = (up - down) / (2.0 * h);
      const double a = grads[t][i];
      const double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), floor});
      ++out.checked;
      ++out.checked_per_tensor[t];
      if (rel > out.max_relative_error) {
        out.max_relative_error = rel;
        out.worst_tensor = tensor_name(model.arch, t);
      }
    }
  }
  return out;
}

GradientCase gradient_case(std::uint64_t seed, Eigen::Index batch) {
  GradientCase c;
  c.model = model_init(CnnArchitecture{}, seed);
  Rng rng(derive_seed(seed, 99));
  // Nonzero biases so bias gradients are exercised away from the init point.
  for (ConvParams& layer : c.model.params.conv) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = rng.normal(0.0, 0.1);
  }
  for (Eigen::Index i = 0; i < c.model.params.fc_bias.size(); ++i) {
    c.model.params.fc_bias(i) = rng.normal(0.0, 0.1);
  }
  c.x.resize(batch, c.model.arch.input_len);
  for (Eigen::Index i = 0; i < c.x.size(); ++i) c.x.data()[i] = rng.normal();
  for (Eigen::Index b = 0; b < batch; ++b) c.labels.push_back(static_cast<int>(rng.below(2)));
  return c;
}

}  // namespace spectrascreen::fixture
