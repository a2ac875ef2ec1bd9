#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "spectrascreen/cli.hpp"
#include "spectrascreen/config.hpp"
#include "spectrascreen/csv.hpp"
#include "spectrascreen/serialize.hpp"

namespace spectrascreen {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"spectrascreen"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Outcome o;
  o.code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("spectrascreen_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }

  // Small enough to run the whole pipeline in about a second.
  void write_small_config(const std::string& name) const {
    write(name, R"({
  "pls": {"n_components": 4},
  "train": {"epochs": 5},
  "synth": {"n_samples": 40, "n_positive": 20}
})");
  }

  fs::path dir_;
};

TEST_F(CliTest, SynthThenEvaluateWritesFiveFolds) {
  write_small_config("run.json");
  Outcome s = run({"synth", "--config", path("run.json"), "--out", path("cohort.csv"),
                   "--truth", path("truth.json")});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_TRUE(s.out.empty());
  const SpectraDataset ds = load_spectra_csv(path("cohort.csv"));
  EXPECT_EQ(ds.samples(), 40u);
  EXPECT_EQ(ds.count_label(1), 20u);
  EXPECT_TRUE(read_json_file(path("truth.json")).contains("perturbed_centers"));

  Outcome e = run({"evaluate", "--in", path("cohort.csv"), "--config", path("run.json"),
                   "--out", path("report.json"), "--threads", "1"});
  ASSERT_EQ(e.code, 0) << e.err;
  const Json report = read_json_file(path("report.json"));
  EXPECT_EQ(report.at("folds").size(), 5u);
  EXPECT_EQ(report.at("config").at("pls").at("n_components"), 4);
  EXPECT_EQ(report.at("config").at("train").at("epochs"), 5);
  // Effective values that the config left out are echoed too.
  EXPECT_EQ(report.at("config").at("airpls").at("lambda"), 1e5);
  EXPECT_EQ(report.at("config").at("folds").at("seed"), 0);
  EXPECT_FALSE(fs::exists(path("report.json.tmp")));
}

TEST_F(CliTest, EchoedConfigReproducesTheReport) {
  write_small_config("run.json");
  ASSERT_EQ(run({"synth", "--config", path("run.json"), "--out", path("c.csv")}).code, 0);
  ASSERT_EQ(run({"evaluate", "--in", path("c.csv"), "--config", path("run.json"),
                 "--out", path("a.json")}).code, 0);
  const Json first = read_json_file(path("a.json"));
  std::ofstream(dir_ / "echo.json") << first.at("config").dump();
  ASSERT_EQ(run({"evaluate", "--in", path("c.csv"), "--config", path("echo.json"),
                 "--out", path("b.json")}).code, 0);
  EXPECT_EQ(read_json_file(path("b.json")), first);
}

TEST_F(CliTest, MissingInIsUsageError) {
  Outcome o = run({"evaluate", "--out", path("report.json")});
  EXPECT_EQ(o.code, cli::kExitUsage);
  EXPECT_NE(o.err.find("--in"), std::string::npos);
  EXPECT_NE(o.err.find("Usage"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("report.json")));
}

TEST_F(CliTest, UnknownSubcommandAndFlagAreUsageErrors) {
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"synth", "--out", path("x.csv"), "--bogus", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
}

TEST_F(CliTest, VersionAndHelp) {
  Outcome v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find('.'), std::string::npos);

  Outcome h = run({"--help"});
  EXPECT_EQ(h.code, 0);
  for (const char* sub : {"preprocess", "fit-pls", "bmi", "train", "evaluate", "synth", "roc"}) {
    EXPECT_NE(h.out.find(sub), std::string::npos) << sub;
  }
}

TEST_F(CliTest, UnknownConfigKeyIsValidationError) {
  write("bad.json", R"({"pls": {"n_components": 4, "ncomp": 3}})");
  write_small_config("run.json");
  ASSERT_EQ(run({"synth", "--config", path("run.json"), "--out", path("c.csv")}).code, 0);
  Outcome o = run({"evaluate", "--in", path("c.csv"), "--config", path("bad.json"),
                   "--out", path("report.json")});
  EXPECT_EQ(o.code, cli::kExitValidation);
  EXPECT_NE(o.err.find("ncomp"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("report.json")));
}

TEST_F(CliTest, MissingInputFileIsValidationError) {
  Outcome o = run({"preprocess", "--in", path("absent.csv"), "--out", path("x.csv")});
  EXPECT_EQ(o.code, cli::kExitValidation);
  EXPECT_NE(o.err.find("absent.csv"), std::string::npos);
}

TEST_F(CliTest, RocExportMatchesReport) {
  write_small_config("run.json");
  ASSERT_EQ(run({"synth", "--config", path("run.json"), "--out", path("c.csv")}).code, 0);
  ASSERT_EQ(run({"evaluate", "--in", path("c.csv"), "--config", path("run.json"),
                 "--out", path("report.json")}).code, 0);
  Outcome o = run({"roc", "--report", path("report.json"), "--out", path("roc.csv")});
  ASSERT_EQ(o.code, 0) << o.err;

  const RocCurve roc = decode_roc(read_json_file(path("report.json")).at("roc"));
  std::ifstream in(path("roc.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "threshold,fpr,tpr");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ASSERT_LT(rows, roc.points.size());
    const RocPoint& p = roc.points[rows];
    EXPECT_EQ(line, format_double(p.threshold) + "," + format_double(p.fpr) + "," +
                        format_double(p.tpr));
    ++rows;
  }
  EXPECT_EQ(rows, roc.points.size());
  EXPECT_EQ(roc.points.front().fpr, 0.0);
  EXPECT_EQ(roc.points.back().tpr, 1.0);
}

TEST_F(CliTest, StepwisePipeline) {
  write("synth.json", R"({"n_samples": 30, "n_positive": 14})");
  ASSERT_EQ(run({"synth", "--config", path("synth.json"), "--out", path("raw.csv")}).code, 0);
  EXPECT_EQ(load_spectra_csv(path("raw.csv")).samples(), 30u);

  Outcome p = run({"preprocess", "--in", path("raw.csv"), "--out", path("corr.csv"),
                   "--lambda", "1e5", "--max-iter", "15", "--tol", "1e-3"});
  ASSERT_EQ(p.code, 0) << p.err;
  const SpectraDataset corr = load_spectra_csv(path("corr.csv"));
  EXPECT_EQ(corr.features(), 874u);

  Outcome f = run({"fit-pls", "--in", path("corr.csv"), "--components", "6", "--out",
                   path("pls.json"), "--scores-out", path("t.csv")});
  ASSERT_EQ(f.code, 0) << f.err;
  const LabeledTable scores = read_labeled_table(fs::path(path("t.csv")));
  EXPECT_EQ(scores.values.rows(), 30);
  EXPECT_EQ(scores.values.cols(), 6);
  EXPECT_EQ(scores.columns.front(), "t1");
  EXPECT_EQ(scores.ids, corr.ids());

  Outcome b = run({"bmi", "--model", path("pls.json"), "--out", path("bmi.json")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_NE(b.err.find('%'), std::string::npos);
  const Json bmi = read_json_file(path("bmi.json"));
  EXPECT_EQ(bmi.dump().find("Lipids") != std::string::npos, true);

  // Flip every label through the override file.
  std::ostringstream flipped;
  flipped << "id,label\n";
  for (std::size_t i = 0; i < scores.ids.size(); ++i) {
    flipped << scores.ids[i] << ',' << 1 - scores.labels[i] << '\n';
  }
  write("labels.csv", flipped.str());
  Outcome t = run({"train", "--scores", path("t.csv"), "--labels", path("labels.csv"),
                   "--epochs", "3", "--lr", "2e-4", "--seed", "7", "--out",
                   path("cnn.json"), "--history-out", path("hist.json")});
  ASSERT_EQ(t.code, 0) << t.err;
  const AttentionCnnModel model = decode_cnn_model(read_json_file(path("cnn.json")));
  EXPECT_EQ(model.arch.input_len, 6);
  EXPECT_EQ(read_json_file(path("hist.json")).at("loss").size(), 3u);
}

TEST_F(CliTest, LabelOverrideMustCoverEverySample) {
  write("t.csv", "id,label,t1,t2\na,0,1,2\nb,1,3,4\n");
  write("labels.csv", "id,label\na,1\n");
  Outcome o = run({"train", "--scores", path("t.csv"), "--labels", path("labels.csv"),
                   "--out", path("cnn.json")});
  EXPECT_EQ(o.code, cli::kExitValidation);
  EXPECT_NE(o.err.find("'b'"), std::string::npos);
}

}  // namespace
}  // namespace spectrascreen
