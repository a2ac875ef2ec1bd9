#include "spectrascreen/data.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "spectrascreen/errors.hpp"

namespace spectrascreen {

WavenumberGrid::WavenumberGrid(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("wavenumber grid is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v) || v <= 0.0) {
      std::ostringstream msg;
      msg << "wavenumber " << i << " is not a finite positive value";
      throw ValidationError(msg.str());
    }
    if (i > 0 && !(v < values_[i - 1])) {
      std::ostringstream msg;
      msg << "wavenumbers must be strictly decreasing (position " << i << ")";
      throw FormatError(msg.str());
    }
  }
}

WavenumberGrid WavenumberGrid::linspace(double hi, double lo,
                                        std::size_t count) {
  if (count == 0) throw PreconditionError("grid needs at least one point");
  if (count == 1) return WavenumberGrid({hi});
  if (!(hi > lo)) throw PreconditionError("grid requires hi > lo");
  std::vector<double> values(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = hi - step * static_cast<double>(i);
  }
  values.back() = lo;
  return WavenumberGrid(std::move(values));
}

WavenumberGrid WavenumberGrid::canonical() {
  static const WavenumberGrid grid =
      linspace(kCanonicalHigh, kCanonicalLow, kCanonicalGridPoints);
  return grid;
}

std::vector<std::size_t> WavenumberGrid::indices_within(double lo,
                                                        double hi) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] >= lo && values_[i] <= hi) out.push_back(i);
  }
  return out;
}

Spectrum::Spectrum(WavenumberGrid grid, Vector absorbance)
    : grid_(std::move(grid)), absorbance_(std::move(absorbance)) {
  if (static_cast<std::size_t>(absorbance_.size()) != grid_.size()) {
    throw ShapeError("spectrum length does not match its grid");
  }
  if (!absorbance_.allFinite()) {
    throw ValidationError("spectrum contains non-finite absorbance");
  }
}

SpectraDataset::SpectraDataset(WavenumberGrid grid, Matrix x,
                               std::vector<int> labels,
                               std::vector<std::string> ids)
    : grid_(std::move(grid)),
      x_(std::move(x)),
      labels_(std::move(labels)),
      ids_(std::move(ids)) {
  if (static_cast<std::size_t>(x_.rows()) != labels_.size()) {
    throw ShapeError("row count does not match label count");
  }
  if (ids_.empty() && !labels_.empty()) {
    ids_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      ids_.push_back(std::to_string(i));
    }
  }
  if (ids_.size() != labels_.size()) {
    throw ShapeError("sample id count does not match label count");
  }
  if (static_cast<std::size_t>(x_.cols()) != grid_.size()) {
    throw ShapeError("feature count does not match the wavenumber grid");
  }
  for (Eigen::Index r = 0; r < x_.rows(); ++r) {
    if (!x_.row(r).allFinite()) {
      throw ValidationError("sample '" + ids_[r] +
                            "' contains a non-finite value");
    }
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 0 && labels_[i] != 1) {
      throw ValidationError("sample '" + ids_[i] + "' has a label outside {0,1}");
    }
  }
}

Spectrum SpectraDataset::row(std::size_t i) const {
  return Spectrum(grid_, x_.row(static_cast<Eigen::Index>(i)).transpose());
}

Vector SpectraDataset::label_vector() const {
  Vector y(static_cast<Eigen::Index>(labels_.size()));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = labels_[i];
  }
  return y;
}

std::size_t SpectraDataset::count_label(int label) const {
  std::size_t n = 0;
  for (int l : labels_) n += (l == label);
  return n;
}

SpectraDataset SpectraDataset::subset(
    std::span<const std::size_t> rows) const {
  Matrix x(static_cast<Eigen::Index>(rows.size()), x_.cols());
  std::vector<int> labels;
  std::vector<std::string> ids;
  labels.reserve(rows.size());
  ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= samples()) throw ShapeError("subset row out of range");
    x.row(static_cast<Eigen::Index>(i)) =
        x_.row(static_cast<Eigen::Index>(rows[i]));
    labels.push_back(labels_[rows[i]]);
    ids.push_back(ids_[rows[i]]);
  }
  return SpectraDataset(grid_, std::move(x), std::move(labels), std::move(ids));
}

bool operator==(const SpectraDataset& a, const SpectraDataset& b) {
  return a.grid_ == b.grid_ && a.labels_ == b.labels_ && a.ids_ == b.ids_ &&
         a.x_.rows() == b.x_.rows() && a.x_.cols() == b.x_.cols() &&
         a.x_ == b.x_;
}

Spectrum average_replicates(std::span<const Spectrum> replicates) {
  if (replicates.empty()) {
    throw PreconditionError("average_replicates needs at least one spectrum");
  }
  const WavenumberGrid& grid = replicates.front().grid();
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
  for (const Spectrum& s : replicates) {
    if (!(s.grid() == grid)) {
      throw ValidationError("replicates were measured on different grids");
    }
    sum += s.absorbance();
  }
  return Spectrum(grid, sum / static_cast<double>(replicates.size()));
}

SpectraDataset truncate_band(const SpectraDataset& ds, double hi, double lo) {
  if (!(hi > lo)) throw PreconditionError("truncate_band requires hi > lo");
  const std::vector<std::size_t> keep = ds.grid().indices_within(lo, hi);
  if (keep.empty()) {
    std::ostringstream msg;
    msg << "band [" << lo << ", " << hi << "] does not intersect the grid";
    throw ValidationError(msg.str());
  }
  std::vector<double> values;
  values.reserve(keep.size());
  Matrix x(ds.x().rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    values.push_back(ds.grid()[keep[j]]);
    x.col(static_cast<Eigen::Index>(j)) =
        ds.x().col(static_cast<Eigen::Index>(keep[j]));
  }
  return SpectraDataset(WavenumberGrid(std::move(values)), std::move(x),
                        ds.labels(), ds.ids());
}

Spectrum class_mean_spectrum(const SpectraDataset& ds, int label) {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(ds.features()));
  std::size_t n = 0;
  for (std::size_t i = 0; i < ds.samples(); ++i) {
    if (ds.labels()[i] != label) continue;
    sum += ds.x().row(static_cast<Eigen::Index>(i)).transpose();
    ++n;
  }
  if (n == 0) {
    throw ValidationError("no samples carry label " + std::to_string(label));
  }
  return Spectrum(ds.grid(), sum / static_cast<double>(n));
}

}  // namespace spectrascreen
