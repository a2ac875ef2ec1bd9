#pragma once

#include "spectrascreen/data.hpp"
#include "spectrascreen/types.hpp"

namespace spectrascreen {

struct AirPlsParams {
  double lambda = 1e5;
  int max_iter = 15;
  double tol_ratio = 1e-3;
  int diff_order = 2;

  void validate() const;
};

struct BaselineResult {
  Vector baseline;
  Vector corrected;  // signal - baseline
  Vector weights;    // weights of the last smoothing pass
  int iterations_used = 0;
  bool converged = false;
};

// Minimizes sum_i w_i (y_i - z_i)^2 + lambda * |D_d z|^2 with D_d the order-d
// forward difference operator. The normal equations are banded with
// half-bandwidth d and are solved by banded Cholesky in O(n d^2).
Vector whittaker_smooth(const Vector& y, const Vector& w, double lambda,
                        int diff_order);

// Adaptive iteratively reweighted penalized least squares baseline.
BaselineResult airpls(const Vector& y, const AirPlsParams& params = {});

// Row-wise airpls. Rows are independent; `threads` > 1 splits them across
// workers with results identical to the sequential pass.
SpectraDataset baseline_correct_dataset(const SpectraDataset& ds,
                                        const AirPlsParams& params = {},
                                        unsigned threads = 1);

}  // namespace spectrascreen
