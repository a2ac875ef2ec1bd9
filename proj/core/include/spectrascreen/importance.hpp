#pragma once

#include <string>
#include <vector>

#include "spectrascreen/data.hpp"
#include "spectrascreen/pls.hpp"
#include "spectrascreen/types.hpp"

namespace spectrascreen {

// Closed wavenumber interval [lo, hi] in cm^-1.
struct BandInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const BandInterval&) const = default;
};

struct Biomolecule {
  std::string name;
  std::vector<BandInterval> intervals;

  bool operator==(const Biomolecule&) const = default;
};

class BandTable {
 public:
  BandTable() = default;
  explicit BandTable(std::vector<Biomolecule> entries);

  // Primary absorption bands of lipids, amides I-III, nucleic acids and
  // carbohydrates.
  static BandTable primary();

  const std::vector<Biomolecule>& entries() const { return entries_; }

  bool operator==(const BandTable&) const = default;

 private:
  std::vector<Biomolecule> entries_;
};

struct VipVector {
  Vector values;
  bool normalized = false;
};

struct BmiEntry {
  std::string name;
  double value = 0.0;
  std::size_t points = 0;  // K, grid points inside the biomolecule's bands
};

struct BmiReport {
  std::vector<BmiEntry> per_biomolecule;  // in band-table order
  BandTable band_table;
  WavenumberGrid grid;

  // Throws ValidationError for an unknown name.
  double at(const std::string& name) const;
};

// SS(i) = Q(i)^2 * t_i^T t_i.
Vector component_ss(const PlsModel& model);

// V(j) = sqrt(M * sum_i SS(i) (w_ji / |w_i|)^2 / sum_i SS(i)).
VipVector vip_scores(const PlsModel& model);

// Min-max rescale to [0, 1].
VipVector normalize_vip(const VipVector& v);

// RMS of the normalized VIP over each biomolecule's band points.
BmiReport bmi(const VipVector& v, const BandTable& table,
              const WavenumberGrid& grid);

}  // namespace spectrascreen
