#pragma once

#include <vector>

#include "spectrascreen/types.hpp"

namespace spectrascreen {

struct PlsConfig {
  int n_components = 24;
  // Convergence tolerance of the inner power iteration on |u - u_new|.
  double epsilon = 1e-10;
  int max_inner_iter = 500;

  void validate() const;
};

// Single-response NIPALS model. Shapes for P training samples, M features and
// N components are given next to each member.
struct PlsModel {
  PlsConfig config;
  RowVector x_mean;          // 1 x M, mean training spectrum
  double y_mean = 0.0;       // mean training response, added back by predict
  Matrix weights;            // M x N, W_L: unit-norm weight vector per component
  Matrix x_loadings;         // M x N, P
  RowVector y_loadings;      // 1 x N, Q: normalized response loading (+-1)
  Vector response_scale;     // N, Y_residual^T t before normalization
  Vector coefficients;       // M, regression coefficients B
  Matrix train_scores;       // P x N, T_train with unit-norm columns
  std::vector<int> inner_iterations;  // power-iteration passes per component
  std::vector<double> y_residual_norms;  // |Y_residual| after each deflation
  std::vector<double> fit_residual_norms;  // |y_c - T (T^T y_c)| per prefix

  int n_components() const { return static_cast<int>(weights.cols()); }
  int n_features() const { return static_cast<int>(weights.rows()); }
};

// NIPALS PLS-1. Components are sign-canonicalized so the largest-magnitude
// entry of each weight column is positive (t, p and q flip with w).
PlsModel pls_fit(const Matrix& x, const Vector& y, const PlsConfig& cfg = {});

// (X_new - x_mean) * W_L.
Matrix pls_transform(const PlsModel& model, const Matrix& x_new);

// (X_new - x_mean) * B + y_mean; continuous, not thresholded.
Vector pls_predict(const PlsModel& model, const Matrix& x_new);

}  // namespace spectrascreen
