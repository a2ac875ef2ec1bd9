#pragma once

// Reference implementations used only by the tests. Each one is written
// independently of the library code path it checks: dense instead of banded,
// long double and closed-form instead of power iteration, explicit loops
// instead of im2col and GEMM.

#include <span>
#include <vector>

#include "spectrascreen/cnn.hpp"
#include "spectrascreen/types.hpp"

namespace spectrascreen::oracle {

// Explicit order-d difference matrix, (n - d) x n.
Matrix difference_matrix(Eigen::Index n, int order);

// Solves (diag(w) + lambda D^T D) z = diag(w) y with a dense factorization.
Vector dense_whittaker(const Vector& y, const Vector& w, double lambda,
                       int order);

struct NipalsReference {
  Matrix weights;
  Matrix scores;
  Matrix x_loadings;
  Vector y_loadings;
  Vector predictions;  // on the query matrix passed to the oracle
};

// PLS-1 with the closed-form weight w = X_res^T y / |X_res^T y|, computed in
// long double. Predictions for `query` go through sequential deflation of
// the query rows rather than a coefficient vector.
NipalsReference nipals_reference(const Matrix& x, const Vector& y, int n,
                                 const Matrix& query);

// Loop-based forward pass of the attention CNN, returning the logits.
Vector naive_forward(const AttentionCnnModel& model, const Vector& input);

// Loop-based cross-correlation with zero padding, before the rectifier.
Matrix naive_conv(const Matrix& x, const Matrix& kernel, const Vector& bias,
                  int kernel_len);

// Probability that a random positive outranks a random negative; ties 1/2.
double concordance_auc(std::span<const double> scores, std::span<const int> truth);

}  // namespace spectrascreen::oracle
