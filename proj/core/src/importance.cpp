#include "spectrascreen/importance.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "spectrascreen/errors.hpp"

namespace spectrascreen {

BandTable::BandTable(std::vector<Biomolecule> entries)
    : entries_(std::move(entries)) {
  std::set<std::string> names;
  for (const Biomolecule& b : entries_) {
    if (b.name.empty()) throw ValidationError("biomolecule name is empty");
    if (!names.insert(b.name).second) {
      throw ValidationError("duplicate biomolecule '" + b.name + "'");
    }
    if (b.intervals.empty()) {
      throw ValidationError("biomolecule '" + b.name + "' has no bands");
    }
    for (const BandInterval& iv : b.intervals) {
      if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
        throw ValidationError("biomolecule '" + b.name +
                              "' has a malformed interval");
      }
    }
  }
}

BandTable BandTable::primary() {
  return BandTable({
      {"Lipids", {{1720, 1760}, {1430, 1470}}},
      {"Amide I", {{1600, 1700}}},
      {"Amide II", {{1500, 1600}}},
      {"Amide III", {{1220, 1350}}},
      {"Nucleic acids", {{1220, 1240}, {1040, 1120}, {950, 1000}}},
      {"Carbohydrates", {{1100, 1180}, {970, 1050}}},
  });
}

double BmiReport::at(const std::string& name) const {
  for (const BmiEntry& e : per_biomolecule) {
    if (e.name == name) return e.value;
  }
  throw ValidationError("no BMI entry for '" + name + "'");
}

Vector component_ss(const PlsModel& model) {
  const Eigen::Index n = model.train_scores.cols();
  if (model.y_loadings.size() != n) {
    throw ShapeError("PLS model loadings and scores disagree on N");
  }
  Vector ss(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double q = model.y_loadings(i);
    ss(i) = q * q * model.train_scores.col(i).squaredNorm();
  }
  return ss;
}

VipVector vip_scores(const PlsModel& model) {
  const Vector ss = component_ss(model);
  const double total = ss.sum();
  if (!(total > 0.0)) {
    throw DegenerateError("explained sums of squares are all zero");
  }
  const Eigen::Index m = model.weights.rows();
  Vector accum = Vector::Zero(m);
  for (Eigen::Index i = 0; i < model.weights.cols(); ++i) {
    const double norm = model.weights.col(i).norm();
    if (!(norm > 0.0)) throw DegenerateError("PLS weight column is zero");
    accum += ss(i) * (model.weights.col(i) / norm).cwiseAbs2();
  }
  VipVector out;
  out.values = (static_cast<double>(m) * accum / total).cwiseSqrt();
  out.normalized = false;
  return out;
}

VipVector normalize_vip(const VipVector& v) {
  if (v.normalized) throw PreconditionError("VIP vector is already normalized");
  if (v.values.size() == 0) throw PreconditionError("VIP vector is empty");
  const double lo = v.values.minCoeff();
  const double hi = v.values.maxCoeff();
  if (!(hi > lo)) throw DegenerateError("VIP vector is constant");
  VipVector out;
  out.values = (v.values.array() - lo) / (hi - lo);
  out.normalized = true;
  return out;
}

BmiReport bmi(const VipVector& v, const BandTable& table,
              const WavenumberGrid& grid) {
  if (!v.normalized) throw PreconditionError("BMI requires normalized VIP");
  if (static_cast<std::size_t>(v.values.size()) != grid.size()) {
    throw ShapeError("VIP length does not match the wavenumber grid");
  }
  BmiReport report;
  report.band_table = table;
  report.grid = grid;
  for (const Biomolecule& b : table.entries()) {
    // A grid point inside two intervals of the same biomolecule counts once.
    std::set<std::size_t> members;
    for (const BandInterval& iv : b.intervals) {
      for (std::size_t idx : grid.indices_within(iv.lo, iv.hi)) {
        members.insert(idx);
      }
    }
    if (members.empty()) {
      throw ValidationError("bands of '" + b.name +
                            "' contain no grid points");
    }
    double sum_sq = 0.0;
    for (std::size_t idx : members) {
      const double value = v.values(static_cast<Eigen::Index>(idx));
      sum_sq += value * value;
    }
    report.per_biomolecule.push_back(
        {b.name, std::sqrt(sum_sq / static_cast<double>(members.size())),
         members.size()});
  }
  return report;
}

}  // namespace spectrascreen
