#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spectrascreen/baseline.hpp"
#include "spectrascreen/cnn.hpp"
#include "spectrascreen/data.hpp"
#include "spectrascreen/pls.hpp"
#include "spectrascreen/train.hpp"

namespace spectrascreen {

struct FoldPlan {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  bool stratified = false;
  std::vector<std::size_t> assignments;  // fold index per sample

  std::vector<std::size_t> sizes() const;
  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

// Seeded Fisher-Yates shuffle, then contiguous chunks; the first n % k folds
// get one extra sample.
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

// Shuffles each class separately and deals them round-robin over the folds.
FoldPlan stratified_kfold_split(std::span<const int> labels, std::size_t k,
                                std::uint64_t seed);

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> predicted,
                          std::span<const int> truth);

// A metric whose denominator is zero is absent rather than NaN.
struct MetricSet {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> f1;
};

MetricSet metrics(const ConfusionMatrix& cm);

// Per-metric arithmetic mean over the sets where that metric is present.
MetricSet mean_metrics(std::span<const MetricSet> sets);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // score >= threshold predicts positive
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) first, (1,1) last
  double auc = 0.0;
};

// Threshold sweep over the distinct scores, tied scores entering together;
// area by the trapezoid rule.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> truth);

struct PipelineConfig {
  AirPlsParams airpls;
  PlsConfig pls;
  CnnArchitecture arch;  // input_len follows pls.n_components
  TrainConfig train;
  std::size_t folds = 5;
  std::uint64_t fold_seed = 0;
  bool stratified = false;
  unsigned threads = 1;
};

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::vector<double> test_scores;  // positive-class probability
  std::vector<int> test_predictions;
  ConfusionMatrix confusion;
  MetricSet metrics;
  double auc = 0.0;  // meaningful only when auc_defined
  bool auc_defined = false;
  TrainHistory history;
  std::uint64_t model_seed = 0;
};

struct EvalReport {
  PipelineConfig config;
  FoldPlan plan;
  std::vector<FoldResult> folds;
  MetricSet mean_metrics;
  std::vector<double> oof_scores;  // out-of-fold positive probability per sample
  RocCurve pooled_roc;
  TrainHistory mean_history;
};

// One fold on already baseline-corrected data: PLS fit on the training rows,
// both partitions projected through the fitted weights, CNN trained on the
// training projections and scored on the test projections.
struct FoldArtifacts {
  PlsModel pls;
  AttentionCnnModel cnn;
  FoldResult result;
};

FoldArtifacts run_fold(const SpectraDataset& corrected, const FoldPlan& plan,
                       std::size_t fold, const PipelineConfig& cfg);

EvalReport cross_validate(const SpectraDataset& ds, const PipelineConfig& cfg);

}  // namespace spectrascreen
