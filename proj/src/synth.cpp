#include "fdfactor/synth.hpp"

#include <algorithm>
#include <numbers>

#include "fdfactor/errors.hpp"
#include "fdfactor/rng.hpp"

namespace fdf::synth {

double NormalStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double r2 = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    r2 = u * u + v * v;
  } while (r2 >= 1.0 || r2 == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(r2) / r2);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

double rough_basis(int k, double s) {
  switch (k) {
    case 1:
      return s > 1.0 / 3.0 ? 1.0 : 0.0;
    case 2: {
      if (s < 1.0 / 3.0 || s > 2.0 / 3.0) return 0.0;
      const double sign = s > 0.5 ? -1.0 : 1.0;
      return sign * 4.0 * (0.2 - std::abs(s - 0.5));
    }
    case 3:
      return std::cos(6.0 * std::numbers::pi * s);
    default:
      throw DomainError("rough basis index must be 1, 2 or 3");
  }
}

RoughSample gen_rough_signals(const RoughDgpConfig& cfg) {
  if (cfg.p < 3 || cfg.T < 2 || cfg.sigma2 < 0.0) {
    throw DomainError("rough DGP needs p >= 3, T >= 2 and sigma2 >= 0");
  }
  const SampleGrid grid = SampleGrid::midpoints(cfg.p);
  const auto T = static_cast<Eigen::Index>(cfg.T);
  const auto p = static_cast<Eigen::Index>(cfg.p);
  Eigen::MatrixXd basis(3, p);
  for (int k = 1; k <= 3; ++k)
    for (Eigen::Index i = 0; i < p; ++i) basis(k - 1, i) = rough_basis(k, grid[static_cast<std::size_t>(i)]);

  NormalStream rng(cfg.seed);
  Eigen::MatrixXd scores(T, 3);
  for (Eigen::Index t = 0; t < T; ++t)
    for (int k = 0; k < 3; ++k) scores(t, k) = std::sqrt(cfg.score_variances[static_cast<std::size_t>(k)]) * rng.normal();

  Eigen::MatrixXd x = scores * basis;
  return {ObservationPanel(std::move(x), grid), std::move(scores)};
}

BSplineBasis::BSplineBasis(std::size_t K) : K_(K) {
  if (K < 4) throw DomainError("cubic B-spline basis needs K >= 4");
  const std::size_t interior = K - 4;
  knots_.assign(4, 0.0);
  for (std::size_t j = 1; j <= interior; ++j) {
    knots_.push_back(static_cast<double>(j) / static_cast<double>(interior + 1));
  }
  knots_.insert(knots_.end(), 4, 1.0);
}

std::vector<double> BSplineBasis::values(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("B-spline argument outside [0, 1]");
  constexpr std::size_t degree = 3;
  // Knot span i with knots[i] <= s < knots[i + 1]; s = 1 belongs to the last span.
  std::size_t span = K_ - 1;
  if (s < 1.0) {
    const auto it = std::upper_bound(knots_.begin() + degree, knots_.begin() + static_cast<std::ptrdiff_t>(K_) + 1, s);
    span = static_cast<std::size_t>(it - knots_.begin()) - 1;
  }
  std::array<double, degree + 1> n{1.0, 0.0, 0.0, 0.0};
  std::array<double, degree + 1> left{};
  std::array<double, degree + 1> right{};
  for (std::size_t j = 1; j <= degree; ++j) {
    left[j] = s - knots_[span + 1 - j];
    right[j] = knots_[span + j] - s;
    double saved = 0.0;
    for (std::size_t r = 0; r < j; ++r) {
      const double tmp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    n[j] = saved;
  }
  std::vector<double> out(K_, 0.0);
  for (std::size_t r = 0; r <= degree; ++r) out[span - degree + r] = n[r];
  return out;
}

Eigen::MatrixXd BSplineBasis::design(const SampleGrid& grid) const {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(K_));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto v = values(grid[i]);
    for (std::size_t k = 0; k < K_; ++k) b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[k];
  }
  return b;
}

std::vector<double> bspline_basis(std::size_t K, double s) { return BSplineBasis(K).values(s); }

ObservationPanel bspline_ls_fit(const ObservationPanel& panel, std::size_t K) {
  if (K > panel.points()) {
    throw DimensionError("B-spline fit with K=" + std::to_string(K) + " needs p >= K (p=" +
                         std::to_string(panel.points()) + ")");
  }
  const Eigen::MatrixXd b = BSplineBasis(K).design(panel.grid());
  const Eigen::MatrixXd gram = b.transpose() * b;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const Eigen::VectorXd diag = Eigen::MatrixXd(llt.matrixL()).diagonal();
  if (llt.info() != Eigen::Success || !(diag.minCoeff() > 1e-7 * diag.maxCoeff())) {
    throw NumericalError("B-spline design matrix is rank deficient on this grid (K=" +
                         std::to_string(K) + ")");
  }
  // Rows are curves: coefficients C (T x K) solve C (B'B) = Y B.
  const Eigen::MatrixXd coef = llt.solve(b.transpose() * panel.values().transpose()).transpose();
  return ObservationPanel(coef * b.transpose(), panel.grid());
}

std::vector<double> spline_coefficient_variances(const SmoothDgpConfig& cfg) {
  const BSplineBasis basis(cfg.K);
  std::vector<double> w(cfg.K);
  for (std::size_t k = 0; k < cfg.K; ++k) w[k] = std::pow(cfg.decay, static_cast<double>(k));
  // Mean over [0, 1] of sum_k w_k B_k(s)^2 by the midpoint rule.
  constexpr std::size_t n = 4096;
  double mean_var = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto v = basis.values((static_cast<double>(j) + 0.5) / n);
    for (std::size_t k = 0; k < cfg.K; ++k) mean_var += w[k] * v[k] * v[k];
  }
  mean_var /= n;
  const double scale = cfg.signal_variance / mean_var;
  for (double& x : w) x *= scale;
  return w;
}

ObservationPanel gen_spline_signals(const SmoothDgpConfig& cfg) {
  if (cfg.K < 4) throw DomainError("smooth DGP needs K >= 4");
  if (!(cfg.theta_ar >= 0.0 && cfg.theta_ar < 1.0)) throw DomainError("smooth DGP needs 0 <= theta < 1");
  if (cfg.signal_variance < 0.0) throw DomainError("signal variance must be nonnegative");
  const SampleGrid grid = SampleGrid::midpoints(cfg.p);
  const Eigen::MatrixXd design = BSplineBasis(cfg.K).design(grid);
  const auto var = spline_coefficient_variances(cfg);
  NormalStream rng(cfg.seed);
  const auto K = static_cast<Eigen::Index>(cfg.K);
  Eigen::MatrixXd coef(static_cast<Eigen::Index>(cfg.T), K);
  for (Eigen::Index t = 0; t < coef.rows(); ++t)
    for (Eigen::Index k = 0; k < K; ++k) coef(t, k) = std::sqrt(var[static_cast<std::size_t>(k)]) * rng.normal();
  return ObservationPanel(coef * design.transpose(), grid);
}

ObservationPanel gen_ar1_noise(std::size_t p, std::size_t T, double theta_ar, double sigma,
                               std::uint64_t seed) {
  if (!(std::abs(theta_ar) < 1.0)) throw DomainError("AR(1) coefficient must satisfy |theta| < 1");
  if (!(sigma >= 0.0)) throw DomainError("noise standard deviation must be nonnegative");
  NormalStream rng(seed);
  const double start_sd = sigma / std::sqrt(1.0 - theta_ar * theta_ar);
  Eigen::MatrixXd u(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(p));
  for (Eigen::Index t = 0; t < u.rows(); ++t) {
    u(t, 0) = start_sd * rng.normal();
    for (Eigen::Index i = 1; i < u.cols(); ++i) u(t, i) = theta_ar * u(t, i - 1) + sigma * rng.normal();
  }
  return ObservationPanel(std::move(u), SampleGrid::midpoints(p));
}

ObservationPanel add_noise(const ObservationPanel& signals, const ObservationPanel& noise) {
  if (signals.curves() != noise.curves() || signals.points() != noise.points()) {
    throw DimensionError("signal and noise panels differ in shape");
  }
  return ObservationPanel(signals.values() + noise.values(), signals.grid());
}

double sse_appr(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw DimensionError("sse_appr: panels differ in shape");
  }
  return (truth - estimate).squaredNorm() / static_cast<double>(truth.size());
}

double sse_appr(const ObservationPanel& truth, const ObservationPanel& estimate) {
  return sse_appr(truth.values(), estimate.values());
}

}  // namespace fdf::synth
