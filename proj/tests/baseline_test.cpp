#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "spectrascreen/baseline.hpp"
#include "spectrascreen/errors.hpp"
#include "spectrascreen/rng.hpp"
#include "spectrascreen/synth.hpp"

namespace spectrascreen {
namespace {

Vector random_weights(Rng& rng, Eigen::Index n) {
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = rng.uniform(0.05, 2.0);
  return w;
}

TEST(WhittakerSmooth, ConstantIsFixed) {
  Rng rng(1);
  for (int d = 1; d <= 3; ++d) {
    const Vector y = Vector::Constant(40, 2.5);
    const Vector z = whittaker_smooth(y, random_weights(rng, 40), 1e6, d);
    EXPECT_LT((z.array() - 2.5).abs().maxCoeff(), 1e-10) << "d=" << d;
  }
}

TEST(WhittakerSmooth, LinearIsFixedForSecondDifferences) {
  const Vector y = Vector::LinSpaced(200, 0.0, 1.0).array() * 3.0 + 0.7;
  const Vector z = whittaker_smooth(y, Vector::Ones(200), 1e5, 2);
  EXPECT_LT((z - y).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(WhittakerSmooth, PolynomialsBelowOrderAreExact) {
  Rng rng(2);
  for (int d = 1; d <= 4; ++d) {
    const Eigen::Index n = 60;
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(n);
      double v = 0.0;
      for (int k = 0; k < d; ++k) v += (k + 1.0) * std::pow(x, k);
      y(i) = v;
    }
    const Vector z = whittaker_smooth(y, random_weights(rng, n), 1e4, d);
    EXPECT_LT((z - y).cwiseAbs().maxCoeff(), 1e-8 * y.cwiseAbs().maxCoeff())
        << "d=" << d;
  }
}

TEST(WhittakerSmooth, SixPointMatchesDenseSolve) {
  Rng rng(3);
  Vector y(6), w(6);
  for (int i = 0; i < 6; ++i) {
    y(i) = rng.normal();
    w(i) = rng.uniform(0.0, 1.0);
  }
  const Vector z = whittaker_smooth(y, w, 10.0, 2);
  EXPECT_LT((z - oracle::dense_whittaker(y, w, 10.0, 2)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(WhittakerSmooth, MatchesDenseSolveUpToLength50) {
  Rng rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(3));
    const Eigen::Index n = d + 1 + static_cast<Eigen::Index>(rng.below(50 - d));
    Vector y(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = rng.normal();
      // Some zero weights, never all of them.
      w(i) = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 3.0);
    }
    // At least d positive weights keep the system definite.
    for (int i = 0; i < d; ++i) w(i) = 1.0;
    const double lambda = std::pow(10.0, rng.uniform(-1.0, 6.0));
    const Vector expected = oracle::dense_whittaker(y, w, lambda, d);
    const Vector z = whittaker_smooth(y, w, lambda, d);
    EXPECT_LT((z - expected).cwiseAbs().maxCoeff(), 1e-10)
        << "n=" << n << " d=" << d << " lambda=" << lambda;
  }
}

TEST(WhittakerSmooth, Errors) {
  const Vector y = Vector::Ones(5);
  EXPECT_THROW(whittaker_smooth(y, Vector::Zero(5), 1.0, 2), SingularityError);
  Vector bad = y;
  bad(2) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(whittaker_smooth(bad, Vector::Ones(5), 1.0, 2), ValidationError);
  EXPECT_THROW(whittaker_smooth(y, Vector::Ones(4), 1.0, 2), ShapeError);
  EXPECT_THROW(whittaker_smooth(Vector::Ones(2), Vector::Ones(2), 1.0, 2),
               PreconditionError);
}

TEST(Airpls, SmoothQuadraticIsAllBaseline) {
  const Eigen::Index n = 874;
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = 2.0 * static_cast<double>(i) / (n - 1.0) - 1.0;
    y(i) = 0.4 + 0.1 * x + 0.2 * x * x;
  }
  const BaselineResult r = airpls(y);
  EXPECT_LT(r.corrected.cwiseAbs().maxCoeff(), 0.01 * y.cwiseAbs().maxCoeff());
}

TEST(Airpls, QuadraticPlusOnePeakRecoversBaseline) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const fixture::BaselineCase c = fixture::baseline_case(rng, 874, 1, 1);
    const BaselineResult r = airpls(c.signal);
    EXPECT_LT(fixture::off_peak_rmse(c, r.baseline), 0.05 * c.baseline_amplitude)
        << "trial " << trial;
  }
}

TEST(Airpls, CorrectedIsSignalMinusBaselineBitExact) {
  Rng rng(6);
  const fixture::BaselineCase c = fixture::baseline_case(rng);
  const BaselineResult r = airpls(c.signal);
  for (Eigen::Index i = 0; i < c.signal.size(); ++i) {
    ASSERT_EQ(r.corrected(i), c.signal(i) - r.baseline(i));
  }
  EXPECT_EQ(r.baseline.size(), c.signal.size());
  EXPECT_EQ(r.weights.size(), c.signal.size());
}

TEST(Airpls, NegativeSpikeIsUpWeightedAndPeaksSurvive) {
  const Eigen::Index n = 400;
  Vector y = Vector::Constant(n, 0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = (static_cast<double>(i) - 100.0) / 6.0;
    y(i) += 0.8 * std::exp(-0.5 * z * z);
  }
  y(300) -= 2.0;
  AirPlsParams p;
  p.max_iter = 30;
  const BaselineResult r = airpls(y, p);
  ASSERT_GE(r.iterations_used, 2);
  // exp(t |r| / |d-|) > 1 for any negative residual; the spike is the most
  // negative residual, so it carries the largest weight.
  EXPECT_GT(r.weights(300), 1.0);
  Eigen::Index arg = 0;
  r.weights.maxCoeff(&arg);
  EXPECT_EQ(arg, 300);
  EXPECT_GT(r.corrected(100), 0.5 * 0.8);
}

TEST(Airpls, ScaleEquivariantWhenIterationCountsAgree) {
  Rng rng(7);
  int compared = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const fixture::BaselineCase c = fixture::baseline_case(rng);
    const double alpha = rng.uniform(0.1, 10.0);
    const BaselineResult a = airpls(c.signal);
    const BaselineResult b = airpls(alpha * c.signal);
    if (a.iterations_used != b.iterations_used) continue;
    ++compared;
    EXPECT_LT((b.baseline - alpha * a.baseline).cwiseAbs().maxCoeff(),
              1e-9 * alpha * a.baseline.cwiseAbs().maxCoeff());
  }
  EXPECT_GE(compared, 15);
}

TEST(Airpls, AllZeroSignalConvergesImmediately) {
  const BaselineResult r = airpls(Vector::Zero(20));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations_used, 1);
  EXPECT_EQ(r.corrected, Vector::Zero(20));
}

TEST(Airpls, ExhaustionIsNotAnError) {
  Rng rng(8);
  const fixture::BaselineCase c = fixture::baseline_case(rng);
  AirPlsParams p;
  p.max_iter = 1;
  p.tol_ratio = 1e-12;
  const BaselineResult r = airpls(c.signal, p);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations_used, 1);
}

TEST(AirPlsParams, Validation) {
  AirPlsParams p;
  p.lambda = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.max_iter = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.tol_ratio = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_THROW(airpls(Vector::Ones(2)), PreconditionError);
}

TEST(BaselineCorrectDataset, ConstantRowsBecomeZero) {
  const WavenumberGrid g = WavenumberGrid::linspace(1800, 900, 50);
  Matrix x(3, 50);
  x.row(0).setConstant(0.1);
  x.row(1).setConstant(1.5);
  x.row(2).setConstant(-0.3);
  const SpectraDataset out =
      baseline_correct_dataset(SpectraDataset(g, x, {0, 1, 0}, {}));
  EXPECT_LT(out.x().cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(out.labels(), (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(out.grid(), g);
}

TEST(BaselineCorrectDataset, SingleRowEqualsAirpls) {
  Rng rng(9);
  const fixture::BaselineCase c = fixture::baseline_case(rng);
  const WavenumberGrid g = WavenumberGrid::canonical();
  const SpectraDataset ds(g, c.signal.transpose(), {1}, {"only"});
  const SpectraDataset out = baseline_correct_dataset(ds);
  EXPECT_EQ(Vector(out.x().row(0).transpose()), airpls(c.signal).corrected);
}

TEST(BaselineCorrectDataset, ThreadedMatchesSequential) {
  SynthConfig sc;
  sc.n_samples = 20;
  sc.n_positive = 9;
  const SpectraDataset ds = gen_dataset(sc).first;
  EXPECT_EQ(baseline_correct_dataset(ds, {}, 4), baseline_correct_dataset(ds, {}, 1));
}

TEST(BaselineCorrectDataset, RowErrorNamesSample) {
  const WavenumberGrid g = WavenumberGrid::linspace(1800, 900, 2);
  const SpectraDataset ds(g, Matrix::Ones(1, 2), {0}, {"tiny"});
  try {
    baseline_correct_dataset(ds);
    FAIL() << "expected an error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("tiny"), std::string::npos);
  }
}

TEST(BaselineCorrectDataset, DefaultCohortWithinBudget) {
  const SpectraDataset ds = gen_dataset(SynthConfig{}).first;
  const auto start = std::chrono::steady_clock::now();
  const SpectraDataset out = baseline_correct_dataset(ds);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(out.samples(), 112u);
  EXPECT_LT(secs, 5.0);
}

}  // namespace
}  // namespace spectrascreen
