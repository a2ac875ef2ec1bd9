#include "spectrascreen/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include <CLI11.hpp>

#include "spectrascreen/baseline.hpp"
#include "spectrascreen/config.hpp"
#include "spectrascreen/csv.hpp"
#include "spectrascreen/data.hpp"
#include "spectrascreen/errors.hpp"
#include "spectrascreen/eval.hpp"
#include "spectrascreen/importance.hpp"
#include "spectrascreen/pls.hpp"
#include "spectrascreen/serialize.hpp"
#include "spectrascreen/synth.hpp"
#include "spectrascreen/train.hpp"

namespace spectrascreen::cli {
namespace {

namespace fs = std::filesystem;

// Writes next to the target and renames, so a failed run never leaves a
// truncated output behind.
void write_atomic(const fs::path& path,
                  const std::function<void(std::ostream&)>& body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move output to " + path.string() + ": " + ec.message());
  }
}

void write_json(const fs::path& path, const Json& j) {
  write_atomic(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

// Score files carry one row per sample; the label file may reorder or
// override them by id.
std::vector<int> read_label_overrides(const fs::path& path,
                                      const std::vector<std::string>& ids) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,label", 0) != 0) {
    throw FormatError(path.string() + ": header must be 'id,label'");
  }
  std::map<std::string, int> by_id;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ValidationError(path.string() + " row " + std::to_string(row) +
                            ": expected id,label");
    }
    std::string label = line.substr(comma + 1);
    if (!label.empty() && label.back() == '\r') label.pop_back();
    if (label != "0" && label != "1") {
      throw ValidationError(path.string() + " row " + std::to_string(row) +
                            ": label must be 0 or 1");
    }
    by_id[line.substr(0, comma)] = label == "1" ? 1 : 0;
  }
  std::vector<int> labels;
  labels.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw ValidationError(path.string() + ": no label for sample '" + id + "'");
    }
    labels.push_back(it->second);
  }
  return labels;
}

// A synth config may be a bare synth block or a run config holding one.
SynthConfig synth_config_from(const Json& j) {
  static const char* const kRunKeys[] = {"airpls", "pls", "train", "folds",
                                         "synth"};
  if (j.is_object()) {
    for (const char* key : kRunKeys) {
      if (j.contains(key)) return decode_run_config(j).synth;
    }
  }
  return decode_synth_config(j);
}

struct PreprocessArgs {
  std::string in, out;
  AirPlsParams airpls;
  double hi = 1800.0;
  double lo = 900.0;
  unsigned threads = 1;
};

struct FitPlsArgs {
  std::string in, out, scores_out;
  PlsConfig pls;
};

struct BmiArgs {
  std::string model, bands, out;
};

struct TrainArgs {
  std::string scores, labels, out, history_out;
  TrainConfig train;
};

struct EvaluateArgs {
  std::string in, config, out;
  unsigned threads = 1;
};

struct SynthArgs {
  std::string config, out, truth;
};

struct RocArgs {
  std::string report, out;
};

void run_preprocess(const PreprocessArgs& a, std::ostream& err) {
  const SpectraDataset raw = load_spectra_csv(a.in);
  const SpectraDataset band = truncate_band(raw, a.hi, a.lo);
  const SpectraDataset corrected =
      baseline_correct_dataset(band, a.airpls, a.threads);
  write_atomic(a.out, [&](std::ostream& out) { write_spectra_csv(corrected, out); });
  err << "corrected " << corrected.samples() << " spectra x "
      << corrected.features() << " points\n";
}

void run_fit_pls(const FitPlsArgs& a, std::ostream& err) {
  const SpectraDataset ds = load_spectra_csv(a.in);
  const PlsModel model = pls_fit(ds.x(), ds.label_vector(), a.pls);
  write_json(a.out, encode(model, ds.grid()));
  if (!a.scores_out.empty()) {
    LabeledTable scores;
    for (int c = 0; c < model.config.n_components; ++c) {
      scores.columns.push_back("t" + std::to_string(c + 1));
    }
    scores.ids = ds.ids();
    scores.labels = ds.labels();
    scores.values = model.train_scores;
    write_atomic(a.scores_out,
                 [&](std::ostream& out) { write_labeled_table(scores, out); });
  }
  err << "fitted " << model.config.n_components << " components on "
      << ds.samples() << " samples\n";
}

void run_bmi(const BmiArgs& a, std::ostream& err) {
  WavenumberGrid grid;
  const PlsModel model = decode_pls_model(read_json_file(a.model), &grid);
  const BandTable table =
      a.bands.empty() ? BandTable::primary() : decode_band_table(read_json_file(a.bands));
  const VipVector raw = vip_scores(model);
  const VipVector normalized = normalize_vip(raw);
  const BmiReport report = bmi(normalized, table, grid);
  write_json(a.out, encode(report, raw, normalized));
  for (const BmiEntry& e : report.per_biomolecule) {
    std::ostringstream pct;
    pct.precision(4);
    pct << 100.0 * e.value;
    err << e.name << ": " << pct.str() << "%\n";
  }
}

void run_train(const TrainArgs& a, std::ostream& err) {
  const LabeledTable scores = read_labeled_table(fs::path(a.scores));
  const std::vector<int> labels =
      a.labels.empty() ? scores.labels : read_label_overrides(a.labels, scores.ids);
  CnnArchitecture arch;
  arch.input_len = static_cast<int>(scores.values.cols());
  arch.validate();
  a.train.validate();
  TrainResult result =
      train(model_init(arch, a.train.seed), scores.values, labels, a.train);
  write_json(a.out, encode(result.model));
  if (!a.history_out.empty()) write_json(a.history_out, encode(result.history));
  if (!result.history.loss.empty()) {
    err << "final training loss " << result.history.loss.back() << ", accuracy "
        << result.history.accuracy.back() << '\n';
  }
}

void run_evaluate(const EvaluateArgs& a, std::ostream& err) {
  const RunConfig cfg =
      a.config.empty() ? RunConfig{} : decode_run_config(read_json_file(a.config));
  const SpectraDataset ds = load_spectra_csv(a.in);
  const EvalReport report = cross_validate(ds, cfg.pipeline(a.threads));
  write_json(a.out, encode_report(report, cfg));
  err << "mean accuracy "
      << (report.mean_metrics.accuracy ? std::to_string(*report.mean_metrics.accuracy)
                                       : std::string("absent"))
      << ", pooled AUC " << report.pooled_roc.auc << '\n';
}

void run_synth(const SynthArgs& a, std::ostream& err) {
  const SynthConfig cfg =
      a.config.empty() ? SynthConfig{} : synth_config_from(read_json_file(a.config));
  const auto [ds, truth] = gen_dataset(cfg);
  write_atomic(a.out, [&](std::ostream& out) { write_spectra_csv(ds, out); });
  if (!a.truth.empty()) write_json(a.truth, encode(truth));
  err << "generated " << ds.samples() << " spectra (" << ds.count_label(1)
      << " positive)\n";
}

void run_roc(const RocArgs& a, std::ostream&) {
  const Json report = read_json_file(a.report);
  if (!report.is_object() || !report.contains("roc")) {
    throw FormatError(a.report + ": no 'roc' block");
  }
  const RocCurve roc = decode_roc(report.at("roc"));
  write_atomic(a.out, [&](std::ostream& out) {
    out << "threshold,fpr,tpr\n";
    for (const RocPoint& p : roc.points) {
      out << format_double(p.threshold) << ',' << format_double(p.fpr) << ','
          << format_double(p.tpr) << '\n';
    }
  });
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Infrared spectrum screening: baseline correction, PLS, BMI, "
               "attention CNN and cross-validation"};
  app.name("spectrascreen");
  app.set_version_flag("--version", SPECTRASCREEN_VERSION);
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::function<void()> action;

  PreprocessArgs pre;
  auto* sub = app.add_subcommand("preprocess", "airPLS baseline correction of a spectra CSV");
  sub->add_option("--in", pre.in, "Raw spectra CSV")->required();
  sub->add_option("--out", pre.out, "Corrected spectra CSV")->required();
  sub->add_option("--lambda", pre.airpls.lambda, "Smoothness penalty")->capture_default_str();
  sub->add_option("--max-iter", pre.airpls.max_iter, "Reweighting iterations")->capture_default_str();
  sub->add_option("--tol", pre.airpls.tol_ratio, "Stop when |d| < tol * |y|")->capture_default_str();
  sub->add_option("--diff-order", pre.airpls.diff_order, "Difference penalty order")->capture_default_str();
  sub->add_option("--hi", pre.hi, "Upper wavenumber kept")->capture_default_str();
  sub->add_option("--lo", pre.lo, "Lower wavenumber kept")->capture_default_str();
  sub->add_option("--threads", pre.threads, "Worker threads")->capture_default_str();
  sub->callback([&] { action = [&] { run_preprocess(pre, err); }; });

  FitPlsArgs fit;
  sub = app.add_subcommand("fit-pls", "Fit a PLS-1 model on corrected spectra");
  sub->add_option("--in", fit.in, "Corrected spectra CSV")->required();
  sub->add_option("--out", fit.out, "Model JSON")->required();
  sub->add_option("--components", fit.pls.n_components, "Latent components")->capture_default_str();
  sub->add_option("--epsilon", fit.pls.epsilon, "Power-iteration tolerance")->capture_default_str();
  sub->add_option("--scores-out", fit.scores_out, "Training scores CSV (id,label,t1..tN)");
  sub->callback([&] { action = [&] { run_fit_pls(fit, err); }; });

  BmiArgs bm;
  sub = app.add_subcommand("bmi", "VIP and biomolecular importance of a PLS model");
  sub->add_option("--model", bm.model, "PLS model JSON")->required();
  sub->add_option("--bands", bm.bands, "Band table JSON (built-in table if omitted)");
  sub->add_option("--out", bm.out, "BMI JSON")->required();
  sub->callback([&] { action = [&] { run_bmi(bm, err); }; });

  TrainArgs tr;
  sub = app.add_subcommand("train", "Train the attention CNN on PLS scores");
  sub->add_option("--scores", tr.scores, "Scores CSV (id,label,t1..tN)")->required();
  sub->add_option("--labels", tr.labels, "id,label CSV overriding the score file labels");
  sub->add_option("--epochs", tr.train.epochs, "Training epochs")->capture_default_str();
  sub->add_option("--lr", tr.train.learning_rate, "Adam learning rate")->capture_default_str();
  sub->add_option("--seed", tr.train.seed, "Initialization seed")->capture_default_str();
  sub->add_option("--out", tr.out, "Model JSON")->required();
  sub->add_option("--history-out", tr.history_out, "Per-epoch loss and accuracy JSON");
  sub->callback([&] { action = [&] { run_train(tr, err); }; });

  EvaluateArgs ev;
  sub = app.add_subcommand("evaluate", "k-fold cross-validation of the full pipeline");
  sub->add_option("--in", ev.in, "Raw spectra CSV")->required();
  sub->add_option("--config", ev.config, "Run config JSON");
  sub->add_option("--out", ev.out, "Report JSON")->required();
  sub->add_option("--threads", ev.threads, "Worker threads")->capture_default_str();
  sub->callback([&] { action = [&] { run_evaluate(ev, err); }; });

  SynthArgs sy;
  sub = app.add_subcommand("synth", "Generate a synthetic cohort");
  sub->add_option("--config", sy.config, "Synth config JSON (bare or inside a run config)");
  sub->add_option("--out", sy.out, "Spectra CSV")->required();
  sub->add_option("--truth", sy.truth, "Ground-truth JSON");
  sub->callback([&] { action = [&] { run_synth(sy, err); }; });

  RocArgs ro;
  sub = app.add_subcommand("roc", "Export the pooled ROC curve of a report");
  sub->add_option("--report", ro.report, "Report JSON")->required();
  sub->add_option("--out", ro.out, "CSV with threshold,fpr,tpr")->required();
  sub->callback([&] { action = [&] { run_roc(ro, err); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    action();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace spectrascreen::cli
