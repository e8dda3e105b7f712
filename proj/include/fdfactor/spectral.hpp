#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdfactor/panel.hpp"

namespace fdf {

/// Eigenvalues and eigenvectors of the p x p matrix (1/T) Y'Y.
struct EigenSystem {
  Eigen::VectorXd gram_eigenvalues;    // gamma_l, descending, length min(T, p)
  Eigen::VectorXd kernel_eigenvalues;  // lambda_l = gamma_l / p
  Eigen::MatrixXd eigvecs;             // p x min(T, p), unit columns
  SampleGrid grid;
};

EigenSystem empirical_eigensystem(const ObservationPanel& panel, bool center = true);

/// Piecewise constant function on [0, 1]. Level i holds on [s_i, s_{i+1});
/// the first level also covers [0, s_1) and the last one extends through 1.
class StepFunction {
 public:
  StepFunction(SampleGrid grid, std::vector<double> levels);

  const SampleGrid& grid() const { return grid_; }
  const std::vector<double>& levels() const { return levels_; }

  double operator()(double s) const;

  /// Right edge of the cell carrying level i.
  double cell_end(std::size_t i) const;
  double cell_begin(std::size_t i) const;

  StepFunction negated() const;

 private:
  SampleGrid grid_;
  std::vector<double> levels_;
};

struct EigenfunctionEstimate {
  StepFunction function;
  std::vector<std::string> warnings;
};

/// Step-function estimate sqrt(p) * psi_l of the l-th eigenfunction
/// (1-based index). Warns when the grid spacing is not 1/p.
EigenfunctionEstimate eigenfunction_estimate(const EigenSystem& system, std::size_t index);

/// Returns f or -f so that <f, reference> >= 0; a zero inner product keeps f.
StepFunction align_sign(const StepFunction& f, const StepFunction& reference);

double inner_product(const StepFunction& f, const StepFunction& g);

/// Exact L2 distance between two step functions.
double l2_distance(const StepFunction& f, const StepFunction& g);

/// L2 distance to a general function: each cell of f is integrated with a
/// composite trapezoid rule on `points_per_cell` subintervals.
double l2_distance(const StepFunction& f, const std::function<double(double)>& g,
                   std::size_t points_per_cell = 64);

}  // namespace fdf
