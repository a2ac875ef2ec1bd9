#include "spectrascreen/train.hpp"

#include <cmath>

#include "spectrascreen/errors.hpp"

namespace spectrascreen {
namespace {

double accuracy_of(const Matrix& proba, std::span<const int> labels) {
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    Eigen::Index best = 0;
    proba.row(i).maxCoeff(&best);
    hits += (best == labels[static_cast<std::size_t>(i)]);
  }
  return static_cast<double>(hits) / static_cast<double>(proba.rows());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam decay constants must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

TrainResult train(AttentionCnnModel model, const Matrix& scores,
                  std::span<const int> labels, const TrainConfig& cfg,
                  HeldOut held_out) {
  cfg.validate();
  if (static_cast<Eigen::Index>(labels.size()) != scores.rows()) {
    throw ShapeError("label count differs from score rows");
  }
  bool has[2] = {false, false};
  for (int l : labels) {
    if (l == 0 || l == 1) has[l] = true;
  }
  if (!has[0] || !has[1]) {
    throw ValidationError("training labels contain a single class");
  }

  CnnParameters first = CnnParameters::zeros_like(model.params);
  CnnParameters second = CnnParameters::zeros_like(model.params);
  auto params = model.params.tensors();
  auto m = first.tensors();
  auto v = second.tensors();

  TrainResult result;
  TrainHistory& h = result.history;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    LossAndGrad lg = loss_and_grad(model, scores, labels);
    if (!std::isfinite(lg.loss)) {
      throw ValidationError("training loss diverged at epoch " +
                            std::to_string(epoch + 1));
    }
    h.loss.push_back(lg.loss);
    h.accuracy.push_back(static_cast<double>(lg.correct) /
                         static_cast<double>(scores.rows()));
    if (held_out.x != nullptr) {
      h.test_loss.push_back(
          mean_cross_entropy(model, *held_out.x, held_out.labels));
      h.test_accuracy.push_back(
          accuracy_of(predict_proba(model, *held_out.x), held_out.labels));
    }

    beta1_pow *= cfg.beta1;
    beta2_pow *= cfg.beta2;
    const double step = cfg.learning_rate * std::sqrt(1.0 - beta2_pow) /
                        (1.0 - beta1_pow);
    // Bias correction folded into the step size; epsilon scaled to match
    // the textbook update m_hat / (sqrt(v_hat) + eps).
    const double eps = cfg.adam_epsilon * std::sqrt(1.0 - beta2_pow);
    auto grads = lg.grads.tensors();
    for (std::size_t t = 0; t < params.size(); ++t) {
      for (std::size_t i = 0; i < params[t].size(); ++i) {
        const double gi = grads[t][i];
        m[t][i] = cfg.beta1 * m[t][i] + (1.0 - cfg.beta1) * gi;
        v[t][i] = cfg.beta2 * v[t][i] + (1.0 - cfg.beta2) * gi * gi;
        params[t][i] -= step * m[t][i] / (std::sqrt(v[t][i]) + eps);
      }
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace spectrascreen
