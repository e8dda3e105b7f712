#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "fdfactor/errors.hpp"
#include "fdfactor/monte_carlo.hpp"
#include "fdfactor/rng.hpp"
#include "fdfactor/spectral.hpp"
#include "fdfactor/synth.hpp"

using fdf::ObservationPanel;
using fdf::SampleGrid;
using fdf::StepFunction;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  fdf::synth::NormalStream rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

SampleGrid left_grid(std::size_t p) {
  std::vector<double> s(p);
  for (std::size_t i = 0; i < p; ++i) s[i] = static_cast<double>(i) / static_cast<double>(p);
  return SampleGrid(s);
}

double squared_norm(const StepFunction& f) {
  const StepFunction zero(f.grid(), std::vector<double>(f.levels().size(), 0.0));
  const double d = fdf::l2_distance(f, zero);
  return d * d;
}

const std::function<double(double)> kJump = [](double s) { return s > 1.0 / 3.0 ? std::sqrt(1.5) : 0.0; };

double phi1_error(const ObservationPanel& y) {
  const auto est = fdf::eigenfunction_estimate(fdf::empirical_eigensystem(y), 1).function;
  return std::min(fdf::l2_distance(est, kJump), fdf::l2_distance(est.negated(), kJump));
}

ObservationPanel rough_panel(std::size_t p, std::size_t T, double sigma2, std::uint64_t seed,
                             std::array<double, 3> variances = {1.0, 0.25, 0.0625}) {
  fdf::synth::RoughDgpConfig cfg;
  cfg.p = p;
  cfg.T = T;
  cfg.seed = fdf::synth::derive_seed(seed, 0, 0);
  cfg.score_variances = variances;
  const auto x = fdf::synth::gen_rough_signals(cfg).signals;
  if (sigma2 == 0.0) return x;
  const auto u = fdf::synth::gen_ar1_noise(p, T, 0.0, std::sqrt(sigma2), fdf::synth::derive_seed(seed, 0, 1));
  return fdf::synth::add_noise(x, u);
}

}  // namespace

TEST(EmpiricalEigensystem, ZeroPanel) {
  const auto sys = fdf::empirical_eigensystem(ObservationPanel(Eigen::MatrixXd::Zero(4, 6)));
  EXPECT_TRUE(sys.gram_eigenvalues.isZero());
  EXPECT_TRUE(sys.kernel_eigenvalues.isZero());
}

TEST(EmpiricalEigensystem, MatchesDualGramEigenvalues) {
  const Eigen::MatrixXd y = gaussian(10, 7, 1);
  for (bool center : {false, true}) {
    const auto sys = fdf::empirical_eigensystem(ObservationPanel(y), center);
    Eigen::MatrixXd yy = y;
    if (center) yy.rowwise() -= y.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> big(yy * yy.transpose() / 10.0);
    const Eigen::VectorXd dual = big.eigenvalues().reverse();
    ASSERT_EQ(sys.gram_eigenvalues.size(), 7);
    for (Eigen::Index l = 0; l < 7; ++l) {
      if (dual(l) < 1e-12) continue;
      EXPECT_NEAR(sys.gram_eigenvalues(l), dual(l), 1e-8 * dual(l));
    }
    EXPECT_LT((sys.kernel_eigenvalues - sys.gram_eigenvalues / 7.0).cwiseAbs().maxCoeff(), 1e-15);
    for (Eigen::Index l = 0; l < 7; ++l) EXPECT_NEAR(sys.eigvecs.col(l).norm(), 1.0, 1e-12);
    for (Eigen::Index l = 1; l < 7; ++l) EXPECT_GE(sys.gram_eigenvalues(l - 1), sys.gram_eigenvalues(l));
  }
}

TEST(EmpiricalEigensystem, IdenticalRowsGiveOneEigenvalue) {
  Eigen::RowVectorXd r(5);
  r << 1, -2, 0.5, 3, 1;
  const Eigen::MatrixXd y = r.replicate(6, 1);
  const auto sys = fdf::empirical_eigensystem(ObservationPanel(y), false);
  EXPECT_NEAR(sys.gram_eigenvalues(0), r.squaredNorm(), 1e-12);
  EXPECT_LT(sys.gram_eigenvalues.tail(4).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EigenfunctionEstimate, ConstantCurvesGiveUnitFunction) {
  Eigen::VectorXd xi(8);
  xi << 1, -2, 0.3, 4, 2, -1, 0.7, 1.5;
  const Eigen::MatrixXd y = xi * Eigen::RowVectorXd::Ones(10);
  const auto est = fdf::eigenfunction_estimate(fdf::empirical_eigensystem(ObservationPanel(y), false), 1);
  for (double v : est.function.levels()) EXPECT_NEAR(v, 1.0, 1e-8);
  EXPECT_TRUE(est.warnings.empty());
}

TEST(EigenfunctionEstimate, UnitNormOnEquidistantGrid) {
  const ObservationPanel y(gaussian(30, 12, 2), left_grid(12));
  const auto sys = fdf::empirical_eigensystem(y);
  for (std::size_t l = 1; l <= 12; ++l) {
    EXPECT_NEAR(squared_norm(fdf::eigenfunction_estimate(sys, l).function), 1.0, 1e-10) << l;
  }
  EXPECT_THROW(fdf::eigenfunction_estimate(sys, 0), fdf::DomainError);
  EXPECT_THROW(fdf::eigenfunction_estimate(sys, 13), fdf::DomainError);
}

TEST(EigenfunctionEstimate, MidpointGridNormCarriesEdgeCells) {
  // The first cell spans [0, s_2) and the last [s_p, 1], of widths 1.5/p and
  // 0.5/p, so the squared norm is 1 + (psi_1^2 - psi_p^2) / 2.
  const ObservationPanel y(gaussian(30, 12, 3));
  const auto sys = fdf::empirical_eigensystem(y);
  for (Eigen::Index l = 0; l < 12; ++l) {
    const double a = sys.eigvecs(0, l), b = sys.eigvecs(11, l);
    const auto f = fdf::eigenfunction_estimate(sys, static_cast<std::size_t>(l) + 1).function;
    EXPECT_NEAR(squared_norm(f), 1.0 + 0.5 * (a * a - b * b), 1e-12);
  }
}

TEST(EigenfunctionEstimate, WarnsOnUnevenGrid) {
  const ObservationPanel y(gaussian(6, 4, 4), SampleGrid({0.0, 0.1, 0.5, 0.9}));
  EXPECT_FALSE(fdf::eigenfunction_estimate(fdf::empirical_eigensystem(y), 1).warnings.empty());
}

TEST(EigenfunctionEstimate, RecoversJumpEigenfunction) {
  std::vector<double> errors;
  for (std::uint64_t r = 0; r < 20; ++r)
    errors.push_back(phi1_error(rough_panel(70, 400, 0.0, 500 + r, {1.0, 0.0, 0.0})));
  EXPECT_LT(fdf::synth::median(errors), 0.1);
}

TEST(EigenfunctionEstimate, ErrorShrinksWithDimensions) {
  std::vector<double> coarse, fine;
  for (std::uint64_t r = 0; r < 50; ++r) {
    coarse.push_back(phi1_error(rough_panel(20, 50, 0.05, 600 + r)));
    fine.push_back(phi1_error(rough_panel(70, 400, 0.05, 600 + r)));
  }
  EXPECT_GE(fdf::synth::median(coarse), 2.0 * fdf::synth::median(fine));
}

TEST(EigenfunctionEstimate, RobustToSmallNoise) {
  std::vector<double> clean, noisy;
  for (std::uint64_t r = 0; r < 50; ++r) {
    clean.push_back(phi1_error(rough_panel(70, 400, 0.0, 700 + r)));
    noisy.push_back(phi1_error(rough_panel(70, 400, 0.05, 700 + r)));
  }
  const double a = fdf::synth::median(clean), b = fdf::synth::median(noisy);
  EXPECT_LT(std::abs(b - a), 0.5 * a);
}

TEST(EmpiricalEigensystem, LeadingEigenvalueOfJumpProcess) {
  std::vector<double> lambda1;
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto sys = fdf::empirical_eigensystem(rough_panel(70, 400, 0.0, 800 + r, {1.0, 0.0, 0.0}));
    lambda1.push_back(sys.kernel_eigenvalues(0));
  }
  EXPECT_LT(std::abs(fdf::synth::median(lambda1) - 2.0 / 3.0), 0.1);
}

TEST(AlignSign, Rules) {
  const auto grid = SampleGrid::midpoints(4);
  const StepFunction f(grid, {1, 2, -1, 0.5});
  EXPECT_EQ(fdf::align_sign(f, f).levels(), f.levels());
  EXPECT_EQ(fdf::align_sign(f, f.negated()).levels(), f.negated().levels());
  const StepFunction a(grid, {1, 0, 0, 0});
  const StepFunction b(grid, {0, 1, 0, 0});
  EXPECT_EQ(fdf::align_sign(a, b).levels(), a.levels());
  EXPECT_THROW(fdf::align_sign(f, StepFunction(SampleGrid::midpoints(3), {1, 1, 1})), fdf::DimensionError);
}

TEST(StepFunction, CellConvention) {
  const StepFunction f(SampleGrid({0.2, 0.5, 0.8}), {1, 2, 3});
  EXPECT_EQ(f(0.0), 1);
  EXPECT_EQ(f(0.2), 1);
  EXPECT_EQ(f(0.49), 1);
  EXPECT_EQ(f(0.5), 2);
  EXPECT_EQ(f(0.8), 3);
  EXPECT_EQ(f(1.0), 3);
}

TEST(L2Distance, Examples) {
  const auto grid = SampleGrid::midpoints(6);
  const StepFunction one(grid, std::vector<double>(6, 1.0));
  const StepFunction zero(grid, std::vector<double>(6, 0.0));
  EXPECT_EQ(fdf::l2_distance(one, one), 0.0);
  EXPECT_NEAR(fdf::l2_distance(one, zero), 1.0, 1e-15);
  EXPECT_NEAR(fdf::l2_distance(zero, [](double) { return 1.0; }), 1.0, 1e-15);
  const auto jump = [](double s) { return s > 1.0 / 3.0 ? 1.0 : 0.0; };
  // Grid with a breakpoint at 1/3 makes the trapezoid exact away from the jump.
  const StepFunction z3(SampleGrid({0.0, 1.0 / 3.0, 2.0 / 3.0}), {0, 0, 0});
  EXPECT_NEAR(fdf::l2_distance(z3, jump, 4096), std::sqrt(2.0 / 3.0), 1e-3);
  // Step against step with mismatched grids: exact merge of breakpoints.
  const StepFunction ind(SampleGrid({0.0, 1.0 / 3.0}), {0, 1});
  EXPECT_NEAR(fdf::l2_distance(ind, zero), std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(fdf::l2_distance(ind, zero), fdf::l2_distance(zero, ind), 1e-15);
}
