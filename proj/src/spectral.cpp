#include "fdfactor/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "fdfactor/errors.hpp"
#include "fdfactor/factor_fit.hpp"

namespace fdf {

EigenSystem empirical_eigensystem(const ObservationPanel& panel, bool center) {
  Eigen::MatrixXd y = panel.values();
  if (center) y.rowwise() -= y.colwise().mean();
  const double T = static_cast<double>(y.rows());
  const double p = static_cast<double>(y.cols());
  const Eigen::MatrixXd cov = (y.transpose() * y) / T;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigensolver did not converge on the " + std::to_string(cov.rows()) +
                         "x" + std::to_string(cov.cols()) + " covariance matrix");
  }
  const Eigen::Index n = cov.rows();
  const Eigen::Index k = std::min(y.rows(), y.cols());
  EigenSystem sys{Eigen::VectorXd(k), Eigen::VectorXd(k), Eigen::MatrixXd(n, k), panel.grid()};
  for (Eigen::Index l = 0; l < k; ++l) {
    sys.gram_eigenvalues(l) = std::max(0.0, solver.eigenvalues()(n - 1 - l));
    sys.eigvecs.col(l) = solver.eigenvectors().col(n - 1 - l).normalized();
  }
  sys.kernel_eigenvalues = sys.gram_eigenvalues / p;
  normalize_signs(sys.eigvecs);
  return sys;
}

StepFunction::StepFunction(SampleGrid grid, std::vector<double> levels)
    : grid_(std::move(grid)), levels_(std::move(levels)) {
  if (levels_.size() != grid_.size()) {
    throw DimensionError("step function has " + std::to_string(levels_.size()) +
                         " levels for a grid of " + std::to_string(grid_.size()) + " points");
  }
}

double StepFunction::operator()(double s) const {
  const auto pts = grid_.points();
  const auto it = std::upper_bound(pts.begin(), pts.end(), s);
  const auto i = it == pts.begin() ? 0 : static_cast<std::size_t>(it - pts.begin()) - 1;
  return levels_[i];
}

double StepFunction::cell_begin(std::size_t i) const { return i == 0 ? 0.0 : grid_[i]; }

double StepFunction::cell_end(std::size_t i) const {
  return i + 1 == grid_.size() ? 1.0 : grid_[i + 1];
}

StepFunction StepFunction::negated() const {
  std::vector<double> neg(levels_.size());
  std::transform(levels_.begin(), levels_.end(), neg.begin(), [](double v) { return -v; });
  return StepFunction(grid_, std::move(neg));
}

EigenfunctionEstimate eigenfunction_estimate(const EigenSystem& system, std::size_t index) {
  const auto available = static_cast<std::size_t>(system.eigvecs.cols());
  if (index < 1 || index > available) {
    throw DomainError("eigenfunction index " + std::to_string(index) + " outside [1, " +
                      std::to_string(available) + "]");
  }
  const std::size_t p = system.grid.size();
  const double scale = std::sqrt(static_cast<double>(p));
  std::vector<double> levels(p);
  for (std::size_t i = 0; i < p; ++i) {
    levels[i] = scale * system.eigvecs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index - 1));
  }
  EigenfunctionEstimate est{StepFunction(system.grid, std::move(levels)), {}};
  if (!system.grid.is_equidistant()) {
    est.warnings.push_back("grid spacing is not 1/p; sqrt(p) scaling only approximately normalizes");
  }
  return est;
}

namespace {

// Breakpoints of both functions merged into one sorted partition of [0, 1].
std::vector<double> merged_breaks(const StepFunction& f, const StepFunction& g) {
  std::vector<double> b{0.0, 1.0};
  for (std::size_t i = 1; i < f.grid().size(); ++i) b.push_back(f.grid()[i]);
  for (std::size_t i = 1; i < g.grid().size(); ++i) b.push_back(g.grid()[i]);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

}  // namespace

double inner_product(const StepFunction& f, const StepFunction& g) {
  const auto b = merged_breaks(f, g);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    const double mid = 0.5 * (b[k] + b[k + 1]);
    sum += f(mid) * g(mid) * (b[k + 1] - b[k]);
  }
  return sum;
}

StepFunction align_sign(const StepFunction& f, const StepFunction& reference) {
  if (!(f.grid() == reference.grid())) throw DimensionError("align_sign: grids differ");
  return inner_product(f, reference) < 0.0 ? f.negated() : f;
}

double l2_distance(const StepFunction& f, const StepFunction& g) {
  const auto b = merged_breaks(f, g);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    const double mid = 0.5 * (b[k] + b[k + 1]);
    const double d = f(mid) - g(mid);
    sum += d * d * (b[k + 1] - b[k]);
  }
  return std::sqrt(sum);
}

double l2_distance(const StepFunction& f, const std::function<double(double)>& g,
                   std::size_t points_per_cell) {
  const std::size_t n = std::max<std::size_t>(points_per_cell, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.levels().size(); ++i) {
    const double a = f.cell_begin(i);
    const double b = f.cell_end(i);
    if (!(b > a)) continue;
    const double h = (b - a) / static_cast<double>(n);
    const double level = f.levels()[i];
    auto sq = [&](double s) {
      const double d = level - g(s);
      return d * d;
    };
    double cell = 0.5 * (sq(a) + sq(b));
    for (std::size_t k = 1; k < n; ++k) cell += sq(a + h * static_cast<double>(k));
    sum += cell * h;
  }
  return std::sqrt(sum);
}

}  // namespace fdf
