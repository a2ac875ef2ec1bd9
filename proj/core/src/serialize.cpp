#include "spectrascreen/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <string_view>

#include "spectrascreen/config.hpp"
#include "spectrascreen/errors.hpp"

namespace spectrascreen {
namespace {

// Reads the keys of one JSON object, remembering which were consumed, so that
// leftovers can be reported as unknown.
class Fields {
 public:
  Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    out = convert<T>(*it, key);
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown key '" + item.key() + "' in " + where_);
      }
    }
  }

 private:
  template <typename T>
  T convert(const Json& v, const char* key) const {
    const std::string name = where_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(name + " must be a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(name + " must be a string");
      return v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(name + " must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
        throw ConfigError(name + " must be non-negative");
      } else {
        return static_cast<T>(v.get<std::int64_t>());
      }
    } else {
      if (!v.is_number()) throw ConfigError(name + " must be a number");
      return v.get<T>();
    }
  }

  const Json& j_;
  std::string where_;
  std::set<std::string, std::less<>> seen_;
};

Json encode_optional(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json encode_threshold(double t) {
  return std::isinf(t) ? Json("inf") : Json(t);
}

void expect_format(const Json& j, std::string_view format) {
  if (!j.is_object() || !j.contains("format") || j["format"] != format) {
    throw FormatError("document is not a " + std::string(format) + " file");
  }
}

}  // namespace

Json encode(const Matrix& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    data.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Json encode(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json encode(const RowVector& v) { return encode(Vector(v.transpose())); }

Matrix decode_matrix(const Json& j) {
  try {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const Json& data = j.at("data");
    if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows) {
      throw FormatError("matrix row count does not match 'rows'");
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Json& row = data[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
        throw FormatError("matrix row " + std::to_string(r) + " has wrong length");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed matrix: ") + e.what());
  }
}

Vector decode_vector(const Json& j) {
  if (!j.is_array()) throw FormatError("expected a numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError("expected a numeric array");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Json encode(const AirPlsParams& p) {
  return {{"lambda", p.lambda},
          {"max_iter", p.max_iter},
          {"tol_ratio", p.tol_ratio},
          {"diff_order", p.diff_order}};
}

Json encode(const PlsConfig& c) {
  return {{"n_components", c.n_components},
          {"epsilon", c.epsilon},
          {"max_inner_iter", c.max_inner_iter}};
}

Json encode(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs},
          {"beta1", c.beta1},                 {"beta2", c.beta2},
          {"adam_epsilon", c.adam_epsilon},   {"seed", c.seed}};
}

Json encode(const CnnArchitecture& a) {
  return {{"input_len", a.input_len},
          {"channels", a.channels},
          {"kernel_len", a.kernel_len},
          {"stride", 1},
          {"padding", "same"},
          {"reduction_ratio", a.reduction_ratio},
          {"n_classes", a.n_classes}};
}

Json encode(const SynthConfig& c) {
  Json peaks = Json::array();
  for (const PeakSpec& p : c.peaks) {
    peaks.push_back({{"biomolecule", p.biomolecule},
                     {"center", p.center},
                     {"width", p.width},
                     {"amplitude", p.amplitude},
                     {"class_shifted", p.class_shifted}});
  }
  const BaselineSpec& b = c.baseline;
  return {{"n_samples", c.n_samples},
          {"n_positive", c.n_positive},
          {"peaks", std::move(peaks)},
          {"class_effect", c.class_effect},
          {"jitter_sigma", c.jitter_sigma},
          {"baseline",
           {{"offset_mean", b.offset_mean},
            {"offset_sd", b.offset_sd},
            {"slope_sd", b.slope_sd},
            {"curvature_mean", b.curvature_mean},
            {"curvature_sd", b.curvature_sd},
            {"hump_amplitude_lo", b.hump_amplitude_lo},
            {"hump_amplitude_hi", b.hump_amplitude_hi},
            {"hump_center_lo", b.hump_center_lo},
            {"hump_center_hi", b.hump_center_hi},
            {"hump_width_lo", b.hump_width_lo},
            {"hump_width_hi", b.hump_width_hi}}},
          {"noise_sigma", c.noise_sigma},
          {"seed", c.seed}};
}

AirPlsParams decode_airpls(const Json& j) {
  AirPlsParams p;
  Fields f(j, "airpls");
  f.get("lambda", p.lambda);
  f.get("max_iter", p.max_iter);
  f.get("tol_ratio", p.tol_ratio);
  f.get("diff_order", p.diff_order);
  f.finish();
  p.validate();
  return p;
}

PlsConfig decode_pls_config(const Json& j) {
  PlsConfig c;
  Fields f(j, "pls");
  f.get("n_components", c.n_components);
  f.get("epsilon", c.epsilon);
  f.get("max_inner_iter", c.max_inner_iter);
  f.finish();
  c.validate();
  return c;
}

TrainConfig decode_train_config(const Json& j) {
  TrainConfig c;
  Fields f(j, "train");
  f.get("learning_rate", c.learning_rate);
  f.get("epochs", c.epochs);
  f.get("beta1", c.beta1);
  f.get("beta2", c.beta2);
  f.get("adam_epsilon", c.adam_epsilon);
  f.get("seed", c.seed);
  f.finish();
  c.validate();
  return c;
}

CnnArchitecture decode_architecture(const Json& j) {
  CnnArchitecture a;
  Fields f(j, "architecture");
  f.get("input_len", a.input_len);
  if (const Json* ch = f.child("channels")) {
    a.channels.clear();
    if (!ch->is_array()) throw ConfigError("architecture.channels must be an array");
    for (const Json& c : *ch) {
      if (!c.is_number_integer()) throw ConfigError("channel counts must be integers");
      a.channels.push_back(c.get<int>());
    }
  }
  f.get("kernel_len", a.kernel_len);
  int stride = 1;
  f.get("stride", stride);
  if (stride != 1) throw ConfigError("only stride 1 is supported");
  std::string padding = "same";
  f.get("padding", padding);
  if (padding != "same") throw ConfigError("only 'same' padding is supported");
  f.get("reduction_ratio", a.reduction_ratio);
  f.get("n_classes", a.n_classes);
  f.finish();
  a.validate();
  return a;
}

SynthConfig decode_synth_config(const Json& j) {
  SynthConfig c;
  Fields f(j, "synth");
  f.get("n_samples", c.n_samples);
  f.get("n_positive", c.n_positive);
  if (const Json* peaks = f.child("peaks")) {
    if (!peaks->is_array()) throw ConfigError("synth.peaks must be an array");
    c.peaks.clear();
    for (const Json& pj : *peaks) {
      PeakSpec p;
      Fields pf(pj, "synth.peaks[]");
      pf.get("biomolecule", p.biomolecule);
      pf.get("center", p.center);
      pf.get("width", p.width);
      pf.get("amplitude", p.amplitude);
      pf.get("class_shifted", p.class_shifted);
      pf.finish();
      c.peaks.push_back(std::move(p));
    }
  }
  f.get("class_effect", c.class_effect);
  f.get("jitter_sigma", c.jitter_sigma);
  if (const Json* bj = f.child("baseline")) {
    BaselineSpec& b = c.baseline;
    Fields bf(*bj, "synth.baseline");
    bf.get("offset_mean", b.offset_mean);
    bf.get("offset_sd", b.offset_sd);
    bf.get("slope_sd", b.slope_sd);
    bf.get("curvature_mean", b.curvature_mean);
    bf.get("curvature_sd", b.curvature_sd);
    bf.get("hump_amplitude_lo", b.hump_amplitude_lo);
    bf.get("hump_amplitude_hi", b.hump_amplitude_hi);
    bf.get("hump_center_lo", b.hump_center_lo);
    bf.get("hump_center_hi", b.hump_center_hi);
    bf.get("hump_width_lo", b.hump_width_lo);
    bf.get("hump_width_hi", b.hump_width_hi);
    bf.finish();
  }
  f.get("noise_sigma", c.noise_sigma);
  f.get("seed", c.seed);
  f.finish();
  c.validate();
  return c;
}

Json encode(const PlsModel& model, const WavenumberGrid& grid) {
  Json grid_json = Json::array();
  for (double w : grid.values()) grid_json.push_back(w);
  return {{"format", "spectrascreen.pls"},
          {"version", 1},
          {"config", encode(model.config)},
          {"dims",
           {{"samples", model.train_scores.rows()},
            {"features", model.weights.rows()},
            {"components", model.weights.cols()}}},
          {"grid", std::move(grid_json)},
          {"x_mean", encode(model.x_mean)},
          {"y_mean", model.y_mean},
          {"weights", encode(model.weights)},
          {"x_loadings", encode(model.x_loadings)},
          {"y_loadings", encode(model.y_loadings)},
          {"response_scale", encode(model.response_scale)},
          {"coefficients", encode(model.coefficients)},
          {"train_scores", encode(model.train_scores)},
          {"inner_iterations", model.inner_iterations},
          {"y_residual_norms", model.y_residual_norms},
          {"fit_residual_norms", model.fit_residual_norms}};
}

PlsModel decode_pls_model(const Json& j, WavenumberGrid* grid) {
  expect_format(j, "spectrascreen.pls");
  try {
    PlsModel m;
    m.config = decode_pls_config(j.at("config"));
    m.x_mean = decode_vector(j.at("x_mean")).transpose();
    m.y_mean = j.at("y_mean").get<double>();
    m.weights = decode_matrix(j.at("weights"));
    m.x_loadings = decode_matrix(j.at("x_loadings"));
    m.y_loadings = decode_vector(j.at("y_loadings")).transpose();
    m.response_scale = decode_vector(j.at("response_scale"));
    m.coefficients = decode_vector(j.at("coefficients"));
    m.train_scores = decode_matrix(j.at("train_scores"));
    m.inner_iterations = j.at("inner_iterations").get<std::vector<int>>();
    m.y_residual_norms = j.at("y_residual_norms").get<std::vector<double>>();
    m.fit_residual_norms = j.at("fit_residual_norms").get<std::vector<double>>();
    const Eigen::Index features = m.weights.rows();
    const Eigen::Index n = m.weights.cols();
    if (m.x_mean.size() != features || m.x_loadings.rows() != features ||
        m.x_loadings.cols() != n || m.y_loadings.size() != n ||
        m.coefficients.size() != features || m.train_scores.cols() != n) {
      throw FormatError("PLS model dimensions are inconsistent");
    }
    if (grid != nullptr) {
      *grid = WavenumberGrid(j.at("grid").get<std::vector<double>>());
      if (static_cast<Eigen::Index>(grid->size()) != features) {
        throw FormatError("PLS model grid does not match its feature count");
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed PLS model: ") + e.what());
  }
}

Json encode(const AttentionCnnModel& model) {
  Json conv = Json::array();
  for (const ConvParams& c : model.params.conv) {
    conv.push_back({{"kernel", encode(c.kernel)}, {"bias", encode(c.bias)}});
  }
  return {{"format", "spectrascreen.cnn"},
          {"version", 1},
          {"architecture", encode(model.arch)},
          {"seed", model.seed},
          {"parameters",
           {{"conv", std::move(conv)},
            {"excite_down", encode(model.params.excite_down)},
            {"excite_up", encode(model.params.excite_up)},
            {"fc_weight", encode(model.params.fc_weight)},
            {"fc_bias", encode(model.params.fc_bias)}}}};
}

AttentionCnnModel decode_cnn_model(const Json& j) {
  expect_format(j, "spectrascreen.cnn");
  try {
    AttentionCnnModel model;
    model.arch = decode_architecture(j.at("architecture"));
    model.seed = j.at("seed").get<std::uint64_t>();
    const Json& p = j.at("parameters");
    for (const Json& c : p.at("conv")) {
      model.params.conv.push_back(
          {decode_matrix(c.at("kernel")), decode_vector(c.at("bias"))});
    }
    model.params.excite_down = decode_matrix(p.at("excite_down"));
    model.params.excite_up = decode_matrix(p.at("excite_up"));
    model.params.fc_weight = decode_matrix(p.at("fc_weight"));
    model.params.fc_bias = decode_vector(p.at("fc_bias"));

    // Shapes must match what the architecture would initialize.
    const AttentionCnnModel ref = model_init(model.arch, 0);
    const auto want = ref.params.tensors();
    const auto have = model.params.tensors();
    bool ok = want.size() == have.size() &&
              model.params.excite_down.rows() == ref.params.excite_down.rows() &&
              model.params.fc_weight.rows() == ref.params.fc_weight.rows();
    for (std::size_t i = 0; ok && i < want.size(); ++i) {
      ok = want[i].size() == have[i].size();
    }
    if (!ok) throw FormatError("CNN parameters do not match the architecture");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed CNN model: ") + e.what());
  }
}

Json encode(const BandTable& table) {
  Json entries = Json::array();
  for (const Biomolecule& b : table.entries()) {
    Json bands = Json::array();
    for (const BandInterval& iv : b.intervals) {
      bands.push_back({{"hi", iv.hi}, {"lo", iv.lo}});
    }
    entries.push_back({{"name", b.name}, {"bands", std::move(bands)}});
  }
  return {{"biomolecules", std::move(entries)}};
}

BandTable decode_band_table(const Json& j) {
  Fields f(j, "bands");
  const Json* list = f.child("biomolecules");
  f.finish();
  if (list == nullptr || !list->is_array()) {
    throw ConfigError("bands file needs a 'biomolecules' array");
  }
  std::vector<Biomolecule> entries;
  for (const Json& ej : *list) {
    Biomolecule b;
    Fields ef(ej, "biomolecules[]");
    ef.get("name", b.name);
    const Json* bands = ef.child("bands");
    ef.finish();
    if (bands == nullptr || !bands->is_array()) {
      throw ConfigError("biomolecule '" + b.name + "' needs a 'bands' array");
    }
    for (const Json& bj : *bands) {
      BandInterval iv;
      Fields bf(bj, "bands[]");
      bf.get("lo", iv.lo);
      bf.get("hi", iv.hi);
      bf.finish();
      b.intervals.push_back(iv);
    }
    entries.push_back(std::move(b));
  }
  return BandTable(std::move(entries));
}

Json encode(const BmiReport& report, const VipVector& raw,
            const VipVector& normalized) {
  Json entries = Json::array();
  for (const BmiEntry& e : report.per_biomolecule) {
    entries.push_back({{"name", e.name},
                       {"bmi", e.value},
                       {"bmi_percent", 100.0 * e.value},
                       {"points", e.points}});
  }
  Json grid = Json::array();
  for (double w : report.grid.values()) grid.push_back(w);
  return {{"format", "spectrascreen.bmi"},
          {"version", 1},
          {"biomolecules", std::move(entries)},
          {"bands", encode(report.band_table)},
          {"grid", std::move(grid)},
          {"vip", encode(raw.values)},
          {"vip_normalized", encode(normalized.values)}};
}

Json encode(const MetricSet& m) {
  return {{"accuracy", encode_optional(m.accuracy)},
          {"sensitivity", encode_optional(m.sensitivity)},
          {"specificity", encode_optional(m.specificity)},
          {"f1", encode_optional(m.f1)}};
}

Json encode(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
}

Json encode(const RocCurve& roc) {
  Json pts = Json::array();
  for (const RocPoint& p : roc.points) {
    pts.push_back({{"fpr", p.fpr}, {"tpr", p.tpr},
                   {"threshold", encode_threshold(p.threshold)}});
  }
  return {{"auc", roc.auc}, {"points", std::move(pts)}};
}

RocCurve decode_roc(const Json& j) {
  try {
    RocCurve roc;
    roc.auc = j.at("auc").get<double>();
    for (const Json& p : j.at("points")) {
      RocPoint pt;
      pt.fpr = p.at("fpr").get<double>();
      pt.tpr = p.at("tpr").get<double>();
      const Json& t = p.at("threshold");
      pt.threshold = t.is_string() ? std::numeric_limits<double>::infinity()
                                   : t.get<double>();
      roc.points.push_back(pt);
    }
    return roc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed ROC curve: ") + e.what());
  }
}

Json encode(const TrainHistory& h) {
  return {{"loss", h.loss},
          {"accuracy", h.accuracy},
          {"test_loss", h.test_loss},
          {"test_accuracy", h.test_accuracy}};
}

Json encode(const FoldPlan& plan) {
  return {{"k", plan.k},
          {"seed", plan.seed},
          {"stratified", plan.stratified},
          {"sizes", plan.sizes()},
          {"assignments", plan.assignments}};
}

Json encode(const SynthTruth& truth) {
  return {{"format", "spectrascreen.synth_truth"},
          {"version", 1},
          {"perturbed_centers", truth.perturbed_centers},
          {"sample_seeds", truth.sample_seeds},
          {"baselines", encode(truth.baselines)}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---- run configuration -----------------------------------------------------

PipelineConfig RunConfig::pipeline(unsigned threads) const {
  PipelineConfig p;
  p.airpls = airpls;
  p.pls = pls;
  p.arch.input_len = pls.n_components;
  p.train = train;
  p.folds = folds;
  p.fold_seed = fold_seed;
  p.stratified = stratified;
  p.threads = threads;
  return p;
}

RunConfig decode_run_config(const Json& j) {
  RunConfig cfg;
  Fields f(j, "config");
  if (const Json* b = f.child("airpls")) cfg.airpls = decode_airpls(*b);
  if (const Json* b = f.child("pls")) cfg.pls = decode_pls_config(*b);
  if (const Json* b = f.child("train")) cfg.train = decode_train_config(*b);
  if (const Json* b = f.child("folds")) {
    Fields ff(*b, "folds");
    ff.get("k", cfg.folds);
    ff.get("seed", cfg.fold_seed);
    ff.get("stratified", cfg.stratified);
    ff.finish();
    if (cfg.folds < 2) throw ConfigError("folds.k must be >= 2");
  }
  if (const Json* b = f.child("synth")) cfg.synth = decode_synth_config(*b);
  f.finish();
  return cfg;
}

Json encode(const RunConfig& cfg) {
  return {{"airpls", encode(cfg.airpls)},
          {"pls", encode(cfg.pls)},
          {"train", encode(cfg.train)},
          {"folds",
           {{"k", cfg.folds},
            {"seed", cfg.fold_seed},
            {"stratified", cfg.stratified}}},
          {"synth", encode(cfg.synth)}};
}

Json encode_report(const EvalReport& report, const RunConfig& cfg) {
  Json folds = Json::array();
  for (const FoldResult& r : report.folds) {
    folds.push_back({{"fold", r.fold + 1},
                     {"train_size", r.train_indices.size()},
                     {"test_size", r.test_indices.size()},
                     {"test_indices", r.test_indices},
                     {"test_scores", r.test_scores},
                     {"test_predictions", r.test_predictions},
                     {"confusion", encode(r.confusion)},
                     {"metrics", encode(r.metrics)},
                     {"auc", r.auc_defined ? Json(r.auc) : Json(nullptr)},
                     {"model_seed", r.model_seed},
                     {"history", encode(r.history)}});
  }
  return {{"format", "spectrascreen.report"},
          {"version", 1},
          {"config", encode(cfg)},
          {"architecture", encode(report.config.arch)},
          {"fold_plan", encode(report.plan)},
          {"folds", std::move(folds)},
          {"mean_metrics", encode(report.mean_metrics)},
          {"oof_scores", report.oof_scores},
          {"roc", encode(report.pooled_roc)},
          {"auc", report.pooled_roc.auc},
          {"mean_history", encode(report.mean_history)}};
}

}  // namespace spectrascreen
