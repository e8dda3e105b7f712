#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fdfactor/errors.hpp"
#include "fdfactor/factor_fit.hpp"
#include "fdfactor/monte_carlo.hpp"
#include "fdfactor/rng.hpp"
#include "fdfactor/synth.hpp"

namespace synth = fdf::synth;
using fdf::ObservationPanel;
using fdf::SampleGrid;

namespace {

// Textbook recursion with 0/0 := 0, on the clamped knot vector built by hand.
double cox_de_boor(const std::vector<double>& t, std::size_t i, int d, double s) {
  if (d == 0) {
    if (t[i] <= s && s < t[i + 1]) return 1.0;
    // Close the last nonempty span on the right so s = 1 is covered.
    return (s == t.back() && t[i] < t[i + 1] && t[i + 1] == t.back()) ? 1.0 : 0.0;
  }
  double out = 0.0;
  if (t[i + d] > t[i]) out += (s - t[i]) / (t[i + d] - t[i]) * cox_de_boor(t, i, d - 1, s);
  if (t[i + d + 1] > t[i + 1]) out += (t[i + d + 1] - s) / (t[i + d + 1] - t[i + 1]) * cox_de_boor(t, i + 1, d - 1, s);
  return out;
}

std::vector<double> clamped_knots(std::size_t K) {
  std::vector<double> t(4, 0.0);
  for (std::size_t j = 1; j + 4 <= K; ++j) t.push_back(static_cast<double>(j) / static_cast<double>(K - 3));
  t.insert(t.end(), 4, 1.0);
  return t;
}

double sample_variance(const Eigen::ArrayXd& x) {
  return (x - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST(RoughDgp, BasisValues) {
  EXPECT_NEAR(synth::rough_basis(2, 0.5), 0.8, 1e-15);
  EXPECT_NEAR(synth::rough_basis(2, 0.55), -0.6, 1e-15);
  EXPECT_EQ(synth::rough_basis(1, 1.0 / 3.0), 0.0);
  EXPECT_EQ(synth::rough_basis(1, 0.34), 1.0);
  EXPECT_EQ(synth::rough_basis(2, 0.7), 0.0);
  EXPECT_THROW(synth::rough_basis(4, 0.5), fdf::DomainError);
}

TEST(RoughDgp, OnlyCosineBelowOneThird) {
  synth::RoughDgpConfig cfg;
  cfg.p = 30;
  cfg.T = 20;
  const auto sample = synth::gen_rough_signals(cfg);
  const auto& grid = sample.signals.grid();
  for (std::size_t i = 0; grid[i] < 1.0 / 3.0; ++i) {
    for (Eigen::Index t = 0; t < 20; ++t) {
      EXPECT_EQ(sample.signals.values()(t, static_cast<Eigen::Index>(i)),
                sample.scores(t, 2) * std::cos(6.0 * M_PI * grid[i]));
    }
  }
  EXPECT_NEAR(grid[0], 0.5 / 30.0, 1e-15);
}

TEST(RoughDgp, VarianceAtRightEnd) {
  synth::RoughDgpConfig cfg;
  cfg.T = 100000;
  cfg.seed = 3;
  const auto sample = synth::gen_rough_signals(cfg);
  Eigen::ArrayXd x1(cfg.T);
  for (Eigen::Index t = 0; t < x1.size(); ++t) {
    double v = 0.0;
    for (int k = 1; k <= 3; ++k) v += sample.scores(t, k - 1) * synth::rough_basis(k, 1.0);
    x1(t) = v;
  }
  EXPECT_NEAR(sample_variance(x1), 1.0 + 1.0 / 16.0, 0.02 * (1.0 + 1.0 / 16.0));
  EXPECT_THROW(synth::gen_rough_signals({2, 10, 0.1, 1}), fdf::DomainError);
}

TEST(SplineDgp, DeterministicAndInSpan) {
  synth::SmoothDgpConfig cfg;
  cfg.p = 60;
  cfg.T = 30;
  cfg.seed = 9;
  const auto a = synth::gen_spline_signals(cfg);
  const auto b = synth::gen_spline_signals(cfg);
  EXPECT_EQ(a.values(), b.values());
  const auto refit = synth::bspline_ls_fit(a, 21);
  EXPECT_LT((refit.values() - a.values()).cwiseAbs().maxCoeff(), 1e-8 * a.values().cwiseAbs().maxCoeff());
  cfg.seed = 10;
  EXPECT_NE(synth::gen_spline_signals(cfg).values(), a.values());
}

TEST(SplineDgp, ZeroCovarianceGivesZeroSignals) {
  synth::SmoothDgpConfig cfg;
  cfg.p = 30;
  cfg.T = 5;
  cfg.signal_variance = 0.0;
  EXPECT_TRUE(synth::gen_spline_signals(cfg).values().isZero(0.0));
  cfg.theta_ar = 1.0;
  EXPECT_THROW(synth::gen_spline_signals(cfg), fdf::DomainError);
}

TEST(SplineDgp, CoefficientVariancesDecayAndMatchSignalLevel) {
  synth::SmoothDgpConfig cfg;
  const auto v = synth::spline_coefficient_variances(cfg);
  ASSERT_EQ(v.size(), 21u);
  for (std::size_t k = 1; k < v.size(); ++k) EXPECT_NEAR(v[k] / v[k - 1], std::pow(2.0, -0.5), 1e-12);
  cfg.p = 200;
  cfg.T = 5000;
  const auto x = synth::gen_spline_signals(cfg);
  const double mean_var = x.values().array().square().mean();
  EXPECT_NEAR(mean_var, 25.0, 0.05 * 25.0);
}

TEST(Ar1Noise, IidVariance) {
  const auto u = synth::gen_ar1_noise(100, 1000, 0.0, 2.0, 4);
  EXPECT_NEAR(sample_variance(u.values().reshaped().array()), 4.0, 0.03 * 4.0);
}

TEST(Ar1Noise, AutocorrelationAndMarginalVariance) {
  const auto u = synth::gen_ar1_noise(1000, 1000, 0.8, 1.0, 5).values();
  double num = 0.0, den = 0.0;
  for (Eigen::Index t = 0; t < u.rows(); ++t) {
    for (Eigen::Index i = 0; i < u.cols(); ++i) {
      den += u(t, i) * u(t, i);
      if (i > 0) num += u(t, i) * u(t, i - 1);
    }
  }
  EXPECT_NEAR(num / den, 0.8, 0.02);
  const double marginal = 1.0 / (1.0 - 0.64);
  EXPECT_NEAR(den / static_cast<double>(u.size()), marginal, 0.03 * marginal);
  // First column is already stationary.
  EXPECT_NEAR(sample_variance(u.col(0).array()), marginal, 0.1 * marginal);
  EXPECT_THROW(synth::gen_ar1_noise(5, 5, 1.0, 1.0, 1), fdf::DomainError);
  EXPECT_THROW(synth::gen_ar1_noise(5, 5, -1.2, 1.0, 1), fdf::DomainError);
}

TEST(AddNoise, Entrywise) {
  const ObservationPanel ones(Eigen::MatrixXd::Ones(3, 4));
  const ObservationPanel zeros(Eigen::MatrixXd::Zero(3, 4));
  EXPECT_EQ(synth::add_noise(ones, ones).values(), Eigen::MatrixXd::Constant(3, 4, 2.0));
  EXPECT_EQ(synth::add_noise(ones, zeros).values(), ones.values());
  EXPECT_EQ(synth::add_noise(zeros, ones).values(), ones.values());
  EXPECT_THROW(synth::add_noise(ones, ObservationPanel(Eigen::MatrixXd::Ones(3, 5))), fdf::DimensionError);
}

TEST(SseAppr, HandValues) {
  Eigen::MatrixXd a(1, 2), b(1, 2);
  a << 0, 0;
  b << 1, 3;
  EXPECT_EQ(synth::sse_appr(a, b), 5.0);
  EXPECT_EQ(synth::sse_appr(b, b), 0.0);
  const Eigen::MatrixXd r = Eigen::MatrixXd::Random(4, 6);
  EXPECT_NEAR(synth::sse_appr(r, (r.array() + 0.3).matrix()), 0.09, 1e-15);
  EXPECT_THROW(synth::sse_appr(a, Eigen::MatrixXd(2, 1)), fdf::DimensionError);
}

TEST(BSplineBasis, MatchesRecursiveDefinition) {
  for (std::size_t K : {4u, 7u, 21u}) {
    const auto t = clamped_knots(K);
    EXPECT_EQ(synth::BSplineBasis(K).knots(), t);
    for (int j = 0; j <= 400; ++j) {
      const double s = j / 400.0;
      const auto v = synth::bspline_basis(K, s);
      ASSERT_EQ(v.size(), K);
      double sum = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        EXPECT_NEAR(v[k], cox_de_boor(t, k, 3, s), 1e-13) << K << " " << k << " " << s;
        EXPECT_GE(v[k], 0.0);
        sum += v[k];
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(BSplineBasis, ClampedEndsAndDomain) {
  const auto v0 = synth::bspline_basis(10, 0.0);
  EXPECT_EQ(v0[0], 1.0);
  EXPECT_EQ(std::accumulate(v0.begin() + 1, v0.end(), 0.0), 0.0);
  const auto v1 = synth::bspline_basis(10, 1.0);
  EXPECT_EQ(v1[9], 1.0);
  EXPECT_THROW(synth::bspline_basis(3, 0.5), fdf::DomainError);
  EXPECT_THROW(synth::bspline_basis(8, 1.01), fdf::DomainError);
  EXPECT_THROW(synth::bspline_basis(8, -0.01), fdf::DomainError);
}

TEST(BSplineFit, ConstantsAndErrors) {
  Eigen::VectorXd c(3);
  c << 1.5, -2, 7;
  const ObservationPanel y(c * Eigen::RowVectorXd::Ones(40));
  const auto fit = synth::bspline_ls_fit(y, 13);
  EXPECT_LT((fit.values() - y.values()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(synth::bspline_ls_fit(y, 41), fdf::DimensionError);
  // All points inside the first knot span: fewer distinct supports than K.
  std::vector<double> s(8);
  for (std::size_t i = 0; i < 8; ++i) s[i] = 0.001 * static_cast<double>(i + 1);
  const ObservationPanel clustered(Eigen::MatrixXd::Ones(2, 8), SampleGrid(s));
  EXPECT_THROW(synth::bspline_ls_fit(clustered, 8), fdf::NumericalError);
}

TEST(BSplineFit, WorseThanFactorFitOnRoughSignals) {
  std::vector<double> pca, bsp;
  for (std::uint64_t r = 0; r < 50; ++r) {
    synth::RoughDgpConfig cfg;
    cfg.seed = synth::derive_seed(31, 0, r, 0);
    const auto x = synth::gen_rough_signals(cfg).signals;
    const auto y = synth::add_noise(x, synth::gen_ar1_noise(50, 200, 0.0, std::sqrt(0.05), synth::derive_seed(31, 0, r, 1)));
    pca.push_back(synth::sse_appr(x.values(), fdf::fit(y, 3).signals));
    bsp.push_back(synth::sse_appr(x, synth::bspline_ls_fit(y, 16)));
  }
  EXPECT_GE(synth::median(bsp), 3.0 * synth::median(pca));
}
