#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spectrascreen/types.hpp"

namespace spectrascreen {

inline constexpr std::size_t kCanonicalGridPoints = 874;
inline constexpr double kCanonicalHigh = 1800.0;
inline constexpr double kCanonicalLow = 900.0;

// Wavenumber axis in cm^-1, strictly decreasing, all values finite and > 0.
class WavenumberGrid {
 public:
  WavenumberGrid() = default;
  explicit WavenumberGrid(std::vector<double> values);

  // `count` evenly spaced points from `hi` down to `lo`, both included.
  static WavenumberGrid linspace(double hi, double lo, std::size_t count);

  // 874 points spanning 1800 to 900 cm^-1 inclusive.
  static WavenumberGrid canonical();

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  // Indices of the points p with lo <= p <= hi.
  std::vector<std::size_t> indices_within(double lo, double hi) const;

  bool operator==(const WavenumberGrid&) const = default;

 private:
  std::vector<double> values_;
};

class Spectrum {
 public:
  Spectrum(WavenumberGrid grid, Vector absorbance);

  const WavenumberGrid& grid() const { return grid_; }
  const Vector& absorbance() const { return absorbance_; }

 private:
  WavenumberGrid grid_;
  Vector absorbance_;
};

// Samples x features absorbance matrix with binary labels (1 = positive).
class SpectraDataset {
 public:
  SpectraDataset(WavenumberGrid grid, Matrix x, std::vector<int> labels,
                 std::vector<std::string> ids);

  const WavenumberGrid& grid() const { return grid_; }
  const Matrix& x() const { return x_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& ids() const { return ids_; }

  std::size_t samples() const { return labels_.size(); }
  std::size_t features() const { return grid_.size(); }

  Spectrum row(std::size_t i) const;
  Vector label_vector() const;
  std::size_t count_label(int label) const;

  // Rows in the order given; used to carve out folds.
  SpectraDataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const SpectraDataset& a, const SpectraDataset& b);

 private:
  WavenumberGrid grid_;
  Matrix x_;
  std::vector<int> labels_;
  std::vector<std::string> ids_;
};

Spectrum average_replicates(std::span<const Spectrum> replicates);

SpectraDataset truncate_band(const SpectraDataset& ds, double hi, double lo);

Spectrum class_mean_spectrum(const SpectraDataset& ds, int label);

}  // namespace spectrascreen
