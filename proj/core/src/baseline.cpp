#include "spectrascreen/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>
#include <vector>

#include "spectrascreen/errors.hpp"

namespace spectrascreen {
namespace {

// Coefficients of one row of the order-d forward difference operator,
// (-1)^(d-k) * C(d, k) for k = 0..d.
std::vector<double> difference_stencil(int order) {
  std::vector<double> c(static_cast<std::size_t>(order) + 1);
  double binom = 1.0;
  for (int k = 0; k <= order; ++k) {
    c[static_cast<std::size_t>(k)] = ((order - k) % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (order - k) / (k + 1);
  }
  return c;
}

// Symmetric band matrix stored by rows: band[i * (bw + 1) + k] holds A(i, i - k)
// for k = 0..bw.
class LowerBand {
 public:
  LowerBand(std::size_t n, std::size_t bw)
      : n_(n), bw_(bw), data_(n * (bw + 1), 0.0) {}

  double& at(std::size_t i, std::size_t k) { return data_[i * (bw_ + 1) + k]; }
  double at(std::size_t i, std::size_t k) const {
    return data_[i * (bw_ + 1) + k];
  }
  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return bw_; }

 private:
  std::size_t n_;
  std::size_t bw_;
  std::vector<double> data_;
};

// In-place Cholesky of a symmetric positive-definite band matrix; on return
// the band holds L with A = L L^T.
void band_cholesky(LowerBand& a) {
  const std::size_t n = a.size();
  const std::size_t bw = a.bandwidth();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a.at(i, 0));
  const double pivot_floor = max_diag * 1e-14;

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t first = i > bw ? i - bw : 0;
    for (std::size_t j = first; j <= i; ++j) {
      double s = a.at(i, i - j);
      // L(i, m) and L(j, m) are both inside the band for m >= max(first, j - bw).
      const std::size_t m0 = std::max(first, j > bw ? j - bw : 0);
      for (std::size_t m = m0; m < j; ++m) s -= a.at(i, i - m) * a.at(j, j - m);
      if (j == i) {
        if (!(s > pivot_floor)) {
          std::ostringstream msg;
          msg << "penalized system is singular (pivot " << i << ")";
          throw SingularityError(msg.str());
        }
        a.at(i, 0) = std::sqrt(s);
      } else {
        a.at(i, i - j) = s / a.at(j, 0);
      }
    }
  }
}

Vector band_solve(const LowerBand& l, Vector b) {
  const std::size_t n = l.size();
  const std::size_t bw = l.bandwidth();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t first = i > bw ? i - bw : 0;
    double s = b(static_cast<Eigen::Index>(i));
    for (std::size_t m = first; m < i; ++m) {
      s -= l.at(i, i - m) * b(static_cast<Eigen::Index>(m));
    }
    b(static_cast<Eigen::Index>(i)) = s / l.at(i, 0);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    const std::size_t last = std::min(n - 1, ii + bw);
    double s = b(static_cast<Eigen::Index>(ii));
    for (std::size_t m = ii + 1; m <= last; ++m) {
      s -= l.at(m, m - ii) * b(static_cast<Eigen::Index>(m));
    }
    b(static_cast<Eigen::Index>(ii)) = s / l.at(ii, 0);
  }
  return b;
}

}  // namespace

void AirPlsParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("airPLS lambda must be positive");
  }
  if (max_iter < 1) throw ConfigError("airPLS max_iter must be >= 1");
  if (!(tol_ratio > 0.0 && tol_ratio < 1.0)) {
    throw ConfigError("airPLS tol_ratio must lie in (0, 1)");
  }
  if (diff_order < 1) throw ConfigError("airPLS diff_order must be >= 1");
}

Vector whittaker_smooth(const Vector& y, const Vector& w, double lambda,
                        int diff_order) {
  if (diff_order < 1) throw PreconditionError("diff_order must be >= 1");
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  const auto n = static_cast<std::size_t>(y.size());
  const auto d = static_cast<std::size_t>(diff_order);
  if (static_cast<std::size_t>(w.size()) != n) {
    throw ShapeError("weights and signal differ in length");
  }
  if (n < d + 1) {
    throw PreconditionError("signal is shorter than diff_order + 1");
  }
  if (!y.allFinite() || !w.allFinite()) {
    throw ValidationError("whittaker_smooth input is not finite");
  }
  if ((w.array() < 0.0).any()) throw ValidationError("weights must be >= 0");
  if (!(w.array() > 0.0).any()) {
    throw SingularityError("all smoothing weights are zero");
  }

  // A = diag(w) + lambda * D^T D. Row r of D touches columns r..r+d, so
  // (D^T D)(i, j) sums stencil[i - r] * stencil[j - r] over the rows r that
  // cover both i and j.
  const std::vector<double> stencil = difference_stencil(diff_order);
  const std::size_t rows = n - d;
  LowerBand a(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k <= d && k <= i; ++k) {
      const std::size_t j = i - k;
      const std::size_t r_lo = i >= d ? i - d : 0;
      const std::size_t r_hi = std::min(j, rows - 1);
      double s = 0.0;
      for (std::size_t r = r_lo; r <= r_hi && r_hi < rows; ++r) {
        s += stencil[i - r] * stencil[j - r];
      }
      a.at(i, k) = lambda * s;
    }
    a.at(i, 0) += w(static_cast<Eigen::Index>(i));
  }
  band_cholesky(a);
  Vector z = band_solve(a, w.cwiseProduct(y));

  // Iterative refinement. The residual w (y - z) - lambda D^T D z is formed
  // from differences of z rather than from the assembled matrix, which keeps
  // it accurate when z is close to a low-order polynomial and A is badly
  // conditioned.
  Vector dz(static_cast<Eigen::Index>(rows));
  Vector residual(static_cast<Eigen::Index>(n));
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k <= d; ++k) {
        s += stencil[k] * z(static_cast<Eigen::Index>(r + k));
      }
      dz(static_cast<Eigen::Index>(r)) = s;
    }
    residual = w.cwiseProduct(y - z);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k <= d; ++k) {
        residual(static_cast<Eigen::Index>(r + k)) -=
            lambda * stencil[k] * dz(static_cast<Eigen::Index>(r));
      }
    }
    z += band_solve(a, residual);
  }
  return z;
}

BaselineResult airpls(const Vector& y, const AirPlsParams& params) {
  params.validate();
  if (y.size() < params.diff_order + 1) {
    throw PreconditionError("signal is shorter than diff_order + 1");
  }
  if (!y.allFinite()) throw ValidationError("airpls input is not finite");

  const double y_l1 = y.cwiseAbs().sum();
  BaselineResult result;
  Vector w = Vector::Ones(y.size());
  Vector z;
  for (int t = 1; t <= params.max_iter; ++t) {
    z = whittaker_smooth(y, w, params.lambda, params.diff_order);
    result.iterations_used = t;
    const Vector residual = y - z;
    double neg_l1 = 0.0;
    for (Eigen::Index i = 0; i < residual.size(); ++i) {
      if (residual(i) < 0.0) neg_l1 -= residual(i);
    }
    // A signal with no negative residual is already its own lower envelope.
    if (neg_l1 < params.tol_ratio * y_l1 || neg_l1 == 0.0) {
      result.converged = true;
      break;
    }
    if (t == params.max_iter) break;
    for (Eigen::Index i = 0; i < residual.size(); ++i) {
      w(i) = residual(i) >= 0.0
                 ? 0.0
                 : std::exp(static_cast<double>(t) * -residual(i) / neg_l1);
    }
  }
  result.baseline = std::move(z);
  result.corrected = y - result.baseline;
  result.weights = std::move(w);
  return result;
}

SpectraDataset baseline_correct_dataset(const SpectraDataset& ds,
                                        const AirPlsParams& params,
                                        unsigned threads) {
  params.validate();
  const std::size_t n = ds.samples();
  Matrix corrected(ds.x().rows(), ds.x().cols());
  std::vector<std::exception_ptr> failures(n);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        const auto r = static_cast<Eigen::Index>(i);
        corrected.row(r) = airpls(ds.x().row(r).transpose(), params)
                               .corrected.transpose();
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t b = 0; b < n; b += chunk) {
      pool.emplace_back(work, b, std::min(n, b + chunk));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw ValidationError("sample '" + ds.ids()[i] + "': " + e.what());
    }
  }
  return SpectraDataset(ds.grid(), std::move(corrected), ds.labels(), ds.ids());
}

}  // namespace spectrascreen
