#include "spectrascreen/eval.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "spectrascreen/errors.hpp"
#include "spectrascreen/rng.hpp"

namespace spectrascreen {
namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<double> mean_series(const std::vector<const std::vector<double>*>& series) {
  if (series.empty() || series.front()->empty()) return {};
  std::vector<double> out(series.front()->size(), 0.0);
  for (const auto* s : series) {
    for (std::size_t i = 0; i < out.size() && i < s->size(); ++i) out[i] += (*s)[i];
  }
  for (double& v : out) v /= static_cast<double>(series.size());
  return out;
}

}  // namespace

std::vector<std::size_t> FoldPlan::sizes() const {
  std::vector<std::size_t> out(k, 0);
  for (std::size_t a : assignments) ++out[a];
  return out;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold split needs k >= 2");
  if (n < k) {
    throw ConfigError("cannot split " + std::to_string(n) + " samples into " +
                      std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(order, rng);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) plan.assignments[order[pos++]] = f;
  }
  return plan;
}

FoldPlan stratified_kfold_split(std::span<const int> labels, std::size_t k,
                                std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold split needs k >= 2");
  if (labels.size() < k) throw ConfigError("fewer samples than folds");
  Rng rng(seed);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratified = true;
  plan.assignments.assign(labels.size(), 0);
  // Dealing continues across classes so fold sizes still differ by at most one.
  std::size_t next = 0;
  for (int cls : {1, 0}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    shuffle(members, rng);
    for (std::size_t idx : members) {
      plan.assignments[idx] = next;
      next = (next + 1) % k;
    }
  }
  return plan;
}

ConfusionMatrix confusion(std::span<const int> predicted,
                          std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw ShapeError("prediction and truth lengths differ");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == 1;
    const bool t = truth[i] == 1;
    if (p && t) ++cm.tp;
    else if (p && !t) ++cm.fp;
    else if (!p && t) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricSet metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("confusion matrix is empty");
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  MetricSet m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
  m.specificity = ratio(cm.tn, cm.tn + cm.fp);
  m.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
  return m;
}

MetricSet mean_metrics(std::span<const MetricSet> sets) {
  auto mean = [&](std::optional<double> MetricSet::*field) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const MetricSet& s : sets) {
      if (const auto& v = s.*field) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  MetricSet m;
  m.accuracy = mean(&MetricSet::accuracy);
  m.sensitivity = mean(&MetricSet::sensitivity);
  m.specificity = mean(&MetricSet::specificity);
  m.f1 = mean(&MetricSet::f1);
  return m;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) {
    throw ShapeError("score and truth lengths differ");
  }
  std::size_t positives = 0;
  for (int t : truth) positives += (t == 1);
  const std::size_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw ValidationError("ROC needs both classes in the truth vector");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("ROC score is not finite");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      if (truth[order[i]] == 1) ++tp;
      else ++fp;
      ++i;
    }
    RocPoint pt{static_cast<double>(fp) / static_cast<double>(negatives),
                static_cast<double>(tp) / static_cast<double>(positives),
                threshold};
    const RocPoint& prev = roc.points.back();
    roc.auc += (pt.fpr - prev.fpr) * (pt.tpr + prev.tpr) / 2.0;
    roc.points.push_back(pt);
  }
  return roc;
}

FoldArtifacts run_fold(const SpectraDataset& corrected, const FoldPlan& plan,
                       std::size_t fold, const PipelineConfig& cfg) {
  if (plan.assignments.size() != corrected.samples()) {
    throw ShapeError("fold plan does not cover the dataset");
  }
  FoldArtifacts art;
  FoldResult& r = art.result;
  r.fold = fold;
  r.train_indices = plan.train_indices(fold);
  r.test_indices = plan.test_indices(fold);

  const SpectraDataset train_set = corrected.subset(r.train_indices);
  const SpectraDataset test_set = corrected.subset(r.test_indices);
  if (train_set.count_label(0) == 0 || train_set.count_label(1) == 0) {
    throw ValidationError("training partition of fold " + std::to_string(fold + 1) +
                          " holds a single class; choose another fold seed or "
                          "enable stratification");
  }

  art.pls = pls_fit(train_set.x(), train_set.label_vector(), cfg.pls);
  const Matrix train_scores = pls_transform(art.pls, train_set.x());
  const Matrix test_scores = pls_transform(art.pls, test_set.x());

  CnnArchitecture arch = cfg.arch;
  arch.input_len = cfg.pls.n_components;
  r.model_seed = derive_seed(cfg.train.seed, fold);
  TrainResult trained =
      train(model_init(arch, r.model_seed), train_scores, train_set.labels(),
            cfg.train, HeldOut{&test_scores, test_set.labels()});
  art.cnn = std::move(trained.model);
  r.history = std::move(trained.history);

  const Matrix proba = predict_proba(art.cnn, test_scores);
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    r.test_scores.push_back(proba(i, 1));
    r.test_predictions.push_back(proba(i, 1) > proba(i, 0) ? 1 : 0);
  }
  r.confusion = confusion(r.test_predictions, test_set.labels());
  r.metrics = metrics(r.confusion);
  if (test_set.count_label(0) > 0 && test_set.count_label(1) > 0) {
    r.auc = roc_auc(r.test_scores, test_set.labels()).auc;
    r.auc_defined = true;
  }
  return art;
}

EvalReport cross_validate(const SpectraDataset& ds, const PipelineConfig& cfg) {
  cfg.airpls.validate();
  cfg.pls.validate();
  cfg.train.validate();
  if (ds.count_label(0) == 0 || ds.count_label(1) == 0) {
    throw ValidationError("cross-validation needs both classes");
  }

  EvalReport report;
  report.config = cfg;
  report.config.arch.input_len = cfg.pls.n_components;
  report.config.arch.validate();
  report.plan = cfg.stratified
                    ? stratified_kfold_split(ds.labels(), cfg.folds, cfg.fold_seed)
                    : kfold_split(ds.samples(), cfg.folds, cfg.fold_seed);
  for (std::size_t f = 0; f < report.plan.k; ++f) {
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (std::size_t i : report.plan.train_indices(f)) {
      (ds.labels()[i] == 1 ? pos : neg)++;
    }
    if (pos == 0 || neg == 0) {
      throw ValidationError("training partition of fold " + std::to_string(f + 1) +
                            " holds a single class; choose another fold seed or "
                            "enable stratification");
    }
  }

  // airPLS uses no labels, so it runs once over every row before splitting.
  const SpectraDataset corrected =
      baseline_correct_dataset(ds, cfg.airpls, cfg.threads);

  const std::size_t k = report.plan.k;
  std::vector<FoldResult> results(k);
  std::vector<std::exception_ptr> failures(k);
  auto work = [&](std::size_t f) {
    try {
      results[f] = run_fold(corrected, report.plan, f, cfg).result;
    } catch (...) {
      failures[f] = std::current_exception();
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(cfg.threads, k));
  if (workers == 1) {
    for (std::size_t f = 0; f < k; ++f) work(f);
  } else {
    for (std::size_t start = 0; start < k; start += workers) {
      std::vector<std::jthread> pool;
      for (std::size_t f = start; f < std::min(k, start + workers); ++f) {
        pool.emplace_back(work, f);
      }
    }
  }
  for (const auto& e : failures) {
    if (e) std::rethrow_exception(e);
  }
  report.folds = std::move(results);

  std::vector<MetricSet> per_fold;
  report.oof_scores.assign(ds.samples(), 0.0);
  std::vector<const std::vector<double>*> loss, acc, test_loss, test_acc;
  for (const FoldResult& r : report.folds) {
    per_fold.push_back(r.metrics);
    for (std::size_t i = 0; i < r.test_indices.size(); ++i) {
      report.oof_scores[r.test_indices[i]] = r.test_scores[i];
    }
    loss.push_back(&r.history.loss);
    acc.push_back(&r.history.accuracy);
    test_loss.push_back(&r.history.test_loss);
    test_acc.push_back(&r.history.test_accuracy);
  }
  report.mean_metrics = mean_metrics(per_fold);
  report.pooled_roc = roc_auc(report.oof_scores, ds.labels());
  report.mean_history.loss = mean_series(loss);
  report.mean_history.accuracy = mean_series(acc);
  report.mean_history.test_loss = mean_series(test_loss);
  report.mean_history.test_accuracy = mean_series(test_acc);
  return report;
}

}  // namespace spectrascreen
