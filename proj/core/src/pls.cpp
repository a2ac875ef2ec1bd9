#include "spectrascreen/pls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spectrascreen/errors.hpp"

namespace spectrascreen {
namespace {

// Relative floor below which a norm is treated as an exact zero.
constexpr double kDegenerateRatio = 64 * std::numeric_limits<double>::epsilon();

[[noreturn]] void degenerate(int component, const char* what) {
  throw DegenerateError("PLS component " + std::to_string(component) + ": " +
                        what);
}

}  // namespace

void PlsConfig::validate() const {
  if (n_components < 1) throw ConfigError("PLS n_components must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("PLS epsilon must be positive");
  if (max_inner_iter < 1) throw ConfigError("PLS max_inner_iter must be >= 1");
}

PlsModel pls_fit(const Matrix& x, const Vector& y, const PlsConfig& cfg) {
  cfg.validate();
  const Eigen::Index samples = x.rows();
  const Eigen::Index features = x.cols();
  const Eigen::Index n = cfg.n_components;
  if (samples < 2) throw PreconditionError("PLS needs at least two samples");
  if (y.size() != samples) throw ShapeError("X and y differ in row count");
  if (!x.allFinite() || !y.allFinite()) {
    throw ValidationError("PLS input is not finite");
  }
  if (n > std::min(samples - 1, features)) {
    throw ConfigError("n_components exceeds min(samples - 1, features)");
  }

  PlsModel model;
  model.config = cfg;
  model.x_mean = x.colwise().mean();
  model.y_mean = y.mean();
  model.weights = Matrix::Zero(features, n);
  model.x_loadings = Matrix::Zero(features, n);
  model.y_loadings = RowVector::Zero(n);
  model.response_scale = Vector::Zero(n);
  model.train_scores = Matrix::Zero(samples, n);

  Matrix x_res = x.rowwise() - model.x_mean;
  Vector y_res = y;
  const Vector y_centered = y.array() - model.y_mean;
  const double x_scale = std::max(x_res.norm(), 1e-300);

  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(i) + 1;
    Vector u = y_res;
    Vector w, t;
    double q = 0.0;
    int passes = 0;
    while (true) {
      ++passes;
      const Vector xtu = x_res.transpose() * u;
      const double xtu_norm = xtu.norm();
      if (!(xtu_norm > kDegenerateRatio * x_scale * std::max(u.norm(), 1.0))) {
        degenerate(label, "X residual carries no covariance with the response");
      }
      w = xtu / xtu_norm;
      const Vector xw = x_res * w;
      const double xw_norm = xw.norm();
      if (!(xw_norm > kDegenerateRatio * x_scale)) {
        degenerate(label, "score vector has zero norm");
      }
      t = xw / xw_norm;
      const double ytt = y_res.dot(t);
      if (!(std::abs(ytt) > 0.0)) degenerate(label, "response loading is zero");
      q = ytt / std::abs(ytt);
      const Vector u_new = y_res * q;
      const double delta = (u - u_new).norm();
      u = u_new;
      if (delta < cfg.epsilon || passes >= cfg.max_inner_iter) break;
    }

    const Vector p = x_res.transpose() * t / t.squaredNorm();
    double scale = y_res.dot(t);

    x_res -= t * p.transpose();
    y_res -= t * q;

    Eigen::Index pivot = 0;
    w.cwiseAbs().maxCoeff(&pivot);
    const double sign = w(pivot) < 0.0 ? -1.0 : 1.0;

    model.weights.col(i) = sign * w;
    model.train_scores.col(i) = sign * t;
    model.x_loadings.col(i) = sign * p;
    model.y_loadings(i) = sign * q;
    model.response_scale(i) = sign * scale;
    model.inner_iterations.push_back(passes);
    model.y_residual_norms.push_back(y_res.norm());

    const auto scores = model.train_scores.leftCols(i + 1);
    const Vector fit = y_centered - scores * (scores.transpose() * y_centered);
    model.fit_residual_norms.push_back(fit.norm());
  }

  // B = W_L (P^T W_L)^{-1} c with c the response loading before its
  // normalization, so that X_c B reproduces the fitted response.
  const Matrix ptw = model.x_loadings.transpose() * model.weights;
  Eigen::FullPivLU<Matrix> lu(ptw);
  if (!lu.isInvertible()) throw SingularityError("P^T W_L is singular");
  model.coefficients = model.weights * lu.solve(model.response_scale);
  return model;
}

Matrix pls_transform(const PlsModel& model, const Matrix& x_new) {
  if (x_new.cols() != model.weights.rows()) {
    throw ShapeError("feature count differs from the fitted PLS model");
  }
  return (x_new.rowwise() - model.x_mean) * model.weights;
}

Vector pls_predict(const PlsModel& model, const Matrix& x_new) {
  if (x_new.cols() != model.coefficients.size()) {
    throw ShapeError("feature count differs from the fitted PLS model");
  }
  return ((x_new.rowwise() - model.x_mean) * model.coefficients).array() +
         model.y_mean;
}

}  // namespace spectrascreen
