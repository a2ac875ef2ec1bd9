#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spectrascreen/data.hpp"
#include "spectrascreen/types.hpp"

namespace spectrascreen {

// Gaussian absorption peak; width is the standard deviation in cm^-1.
struct PeakSpec {
  std::string biomolecule;
  double center = 0.0;
  double width = 0.0;
  double amplitude = 0.0;
  bool class_shifted = false;  // scaled by class_effect in positive samples

  bool operator==(const PeakSpec&) const = default;
};

// Per-sample background: a quadratic in x = (nu - mid) / half_span plus one
// broad Gaussian hump. Every coefficient is drawn independently per sample.
struct BaselineSpec {
  double offset_mean = 0.25;
  double offset_sd = 0.05;
  double slope_sd = 0.05;
  double curvature_mean = 0.03;
  double curvature_sd = 0.02;
  double hump_amplitude_lo = 0.02;
  double hump_amplitude_hi = 0.08;
  double hump_center_lo = 1000.0;
  double hump_center_hi = 1700.0;
  double hump_width_lo = 250.0;
  double hump_width_hi = 400.0;

  bool operator==(const BaselineSpec&) const = default;
};

struct SynthConfig {
  std::size_t n_samples = 112;
  std::size_t n_positive = 53;
  std::vector<PeakSpec> peaks = default_peaks();
  double class_effect = 1.15;
  double jitter_sigma = 0.1;  // log-sd of the per-sample, per-peak amplitude factor
  BaselineSpec baseline;
  double noise_sigma = 0.001;
  std::uint64_t seed = 0;

  // Peaks at the approximate band maxima of lipids, amides I-III, nucleic
  // acids and carbohydrates. Amide and nucleic-acid peaks carry the class
  // effect; lipid and carbohydrate peaks do not.
  static std::vector<PeakSpec> default_peaks();

  void validate() const;
};

struct SynthTruth {
  Matrix baselines;  // samples x features
  std::vector<double> perturbed_centers;
  std::vector<std::uint64_t> sample_seeds;  // seeds of each sample's draws
};

std::pair<SpectraDataset, SynthTruth> gen_dataset(const SynthConfig& cfg);

}  // namespace spectrascreen
