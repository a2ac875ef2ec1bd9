#include "spectrascreen/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "spectrascreen/errors.hpp"
#include "spectrascreen/rng.hpp"

namespace spectrascreen {

std::vector<PeakSpec> SynthConfig::default_peaks() {
  // The ester carbonyl band of serum lipids is weak next to amide I.
  return {
      {"Lipids", 1750, 12, 0.015, false},
      {"Lipids", 1736, 12, 0.02, false},
      {"Amide I", 1685, 15, 0.20, true},
      {"Amide I", 1659, 18, 0.55, true},
      {"Amide II", 1549, 16, 0.35, true},
      {"Amide II", 1517, 14, 0.15, true},
      {"Amide III", 1307, 20, 0.10, true},
      {"Amide III", 1255, 15, 0.08, true},
      {"Nucleic acids", 1224, 12, 0.10, true},
      {"Nucleic acids", 1087, 15, 0.12, true},
      {"Carbohydrates", 1150, 20, 0.10, false},
      {"Carbohydrates", 1050, 22, 0.18, false},
  };
}

void SynthConfig::validate() const {
  if (n_samples < 2) throw ConfigError("synth needs at least two samples");
  if (n_positive > n_samples) {
    throw ConfigError("n_positive exceeds n_samples");
  }
  if (peaks.empty()) throw ConfigError("synth needs at least one peak");
  bool any_shifted = false;
  for (const PeakSpec& p : peaks) {
    if (!(p.width > 0.0) || !(p.amplitude > 0.0) || !std::isfinite(p.center)) {
      throw ConfigError("peak at " + std::to_string(p.center) +
                        " needs positive width and amplitude");
    }
    any_shifted = any_shifted || p.class_shifted;
  }
  if (!any_shifted) throw ConfigError("no peak carries the class effect");
  if (!(class_effect > 0.0)) throw ConfigError("class_effect must be positive");
  if (!(jitter_sigma >= 0.0)) throw ConfigError("jitter_sigma must be >= 0");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  const BaselineSpec& b = baseline;
  if (b.offset_sd < 0 || b.slope_sd < 0 || b.curvature_sd < 0 ||
      b.hump_amplitude_hi < b.hump_amplitude_lo ||
      b.hump_center_hi < b.hump_center_lo || b.hump_width_hi < b.hump_width_lo ||
      !(b.hump_width_lo > 0.0)) {
    throw ConfigError("baseline ranges are malformed");
  }
}

std::pair<SpectraDataset, SynthTruth> gen_dataset(const SynthConfig& cfg) {
  cfg.validate();
  const WavenumberGrid grid = WavenumberGrid::canonical();
  const auto n = static_cast<Eigen::Index>(cfg.n_samples);
  const auto m = static_cast<Eigen::Index>(grid.size());
  const double mid = (kCanonicalHigh + kCanonicalLow) / 2.0;
  const double half_span = (kCanonicalHigh - kCanonicalLow) / 2.0;

  // Label positions come from their own stream so that changing the class
  // balance does not reshuffle every other draw.
  std::vector<int> labels(cfg.n_samples, 0);
  {
    std::vector<std::size_t> order(cfg.n_samples);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, 0));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    }
    for (std::size_t i = 0; i < cfg.n_positive; ++i) labels[order[i]] = 1;
  }

  SynthTruth truth;
  truth.baselines.resize(n, m);
  for (const PeakSpec& p : cfg.peaks) {
    if (p.class_shifted) truth.perturbed_centers.push_back(p.center);
  }

  Matrix x(n, m);
  std::vector<std::string> ids;
  ids.reserve(cfg.n_samples);
  for (Eigen::Index s = 0; s < n; ++s) {
    const std::uint64_t sample_seed =
        derive_seed(cfg.seed, static_cast<std::uint64_t>(s) + 1);
    truth.sample_seeds.push_back(sample_seed);
    Rng rng(sample_seed);
    const bool positive = labels[static_cast<std::size_t>(s)] == 1;

    std::vector<double> amplitude;
    for (const PeakSpec& p : cfg.peaks) {
      double a = p.amplitude * std::exp(cfg.jitter_sigma * rng.normal());
      if (positive && p.class_shifted) a *= cfg.class_effect;
      amplitude.push_back(a);
    }

    const BaselineSpec& b = cfg.baseline;
    const double offset = rng.normal(b.offset_mean, b.offset_sd);
    const double slope = rng.normal(0.0, b.slope_sd);
    const double curvature = rng.normal(b.curvature_mean, b.curvature_sd);
    const double hump_amp = rng.uniform(b.hump_amplitude_lo, b.hump_amplitude_hi);
    const double hump_center = rng.uniform(b.hump_center_lo, b.hump_center_hi);
    const double hump_width = rng.uniform(b.hump_width_lo, b.hump_width_hi);

    for (Eigen::Index j = 0; j < m; ++j) {
      const double nu = grid[static_cast<std::size_t>(j)];
      double peaks = 0.0;
      for (std::size_t k = 0; k < cfg.peaks.size(); ++k) {
        const double z = (nu - cfg.peaks[k].center) / cfg.peaks[k].width;
        peaks += amplitude[k] * std::exp(-0.5 * z * z);
      }
      const double xs = (nu - mid) / half_span;
      const double zh = (nu - hump_center) / hump_width;
      const double base = offset + slope * xs + curvature * xs * xs +
                          hump_amp * std::exp(-0.5 * zh * zh);
      const double noise = cfg.noise_sigma * rng.normal();
      truth.baselines(s, j) = base;
      x(s, j) = base + (peaks + noise);
    }
    char id[16];
    std::snprintf(id, sizeof(id), "S%03lld", static_cast<long long>(s + 1));
    ids.emplace_back(id);
  }
  return {SpectraDataset(grid, std::move(x), std::move(labels), std::move(ids)),
          std::move(truth)};
}

}  // namespace spectrascreen
