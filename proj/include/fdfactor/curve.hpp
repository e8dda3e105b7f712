#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fdfactor/factor_fit.hpp"
#include "fdfactor/panel.hpp"

namespace fdf {

/// Linear interpolant through (s_i, x_i), held constant outside [s_1, s_p].
class PiecewiseLinearCurve {
 public:
  PiecewiseLinearCurve(SampleGrid grid, std::vector<double> knot_values);

  const SampleGrid& grid() const { return grid_; }
  const std::vector<double>& knot_values() const { return knots_; }

  /// Throws DomainError for s outside [0, 1].
  double evaluate(double s) const;
  double operator()(double s) const { return evaluate(s); }

  /// Values on `resolution` equally spaced points covering [0, 1].
  std::vector<double> dense_trace(std::size_t resolution = 1000) const;

 private:
  SampleGrid grid_;
  std::vector<double> knots_;
};

/// Interpolant of the fitted signal of curve t (1-based).
PiecewiseLinearCurve interpolate(const FactorFit& fit, std::size_t t);

/// Dense traces of every fitted curve. Row 0 holds the abscissae, row t the
/// values of curve t.
Eigen::MatrixXd dense_traces(const FactorFit& fit, std::size_t resolution = 1000);

}  // namespace fdf
