#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fdfactor/panel.hpp"

namespace fdf::synth {

/// Signals with a jump at 1/3 and a kink at 1/2:
///   X_t(s) = sum_k xi_tk phi_k(s),  xi_tk ~ N(0, v_k),  v = (1, 1/4, 1/16).
struct RoughDgpConfig {
  std::size_t p = 50;
  std::size_t T = 200;
  double sigma2 = 0.05;  // noise variance used by callers that add noise
  std::uint64_t seed = 1;
  std::array<double, 3> score_variances{1.0, 0.25, 0.0625};
};

/// phi_1 = 1{s > 1/3}; phi_2 = (-1)^kappa 4 (0.2 - |s - 0.5|) on [1/3, 2/3]
/// with kappa = 1{s in (1/2, 2/3]}; phi_3 = cos(6 pi s). k is 1-based.
double rough_basis(int k, double s);

struct RoughSample {
  ObservationPanel signals;
  Eigen::MatrixXd scores;  // T x 3
};

RoughSample gen_rough_signals(const RoughDgpConfig& cfg);

/// Random curves in the span of K clamped cubic B-splines with independent
/// N(0, v_k) coefficients, v_k proportional to decay^(k-1) and scaled so
/// that the mean pointwise variance over [0, 1] equals signal_variance.
struct SmoothDgpConfig {
  std::size_t p = 48;
  std::size_t T = 200;
  std::size_t K = 21;
  double theta_ar = 0.0;
  double sigma = 2.0;
  double signal_variance = 25.0;
  double decay = 0.7071067811865476;  // 2^(-1/2)
  std::uint64_t seed = 1;
};

ObservationPanel gen_spline_signals(const SmoothDgpConfig& cfg);

/// Per-coefficient variances of the smooth DGP.
std::vector<double> spline_coefficient_variances(const SmoothDgpConfig& cfg);

/// T independent stationary AR(1) paths of length p on the midpoint grid.
ObservationPanel gen_ar1_noise(std::size_t p, std::size_t T, double theta_ar, double sigma,
                               std::uint64_t seed);

ObservationPanel add_noise(const ObservationPanel& signals, const ObservationPanel& noise);

/// (1/pT) sum (X - Xhat)^2.
double sse_appr(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);
double sse_appr(const ObservationPanel& truth, const ObservationPanel& estimate);

/// Cubic B-splines on [0, 1] with clamped ends and K - 4 equally spaced
/// interior knots, evaluated by the Cox-de Boor recursion.
class BSplineBasis {
 public:
  explicit BSplineBasis(std::size_t K);

  std::size_t size() const { return K_; }
  const std::vector<double>& knots() const { return knots_; }
  std::vector<double> values(double s) const;
  Eigen::MatrixXd design(const SampleGrid& grid) const;

 private:
  std::size_t K_;
  std::vector<double> knots_;
};

std::vector<double> bspline_basis(std::size_t K, double s);

/// Row-wise least-squares projection onto the K-dimensional spline space.
ObservationPanel bspline_ls_fit(const ObservationPanel& panel, std::size_t K);

}  // namespace fdf::synth
