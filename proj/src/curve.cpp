#include "fdfactor/curve.hpp"

#include <algorithm>

#include "fdfactor/errors.hpp"

namespace fdf {

PiecewiseLinearCurve::PiecewiseLinearCurve(SampleGrid grid, std::vector<double> knot_values)
    : grid_(std::move(grid)), knots_(std::move(knot_values)) {
  if (knots_.size() != grid_.size()) {
    throw DimensionError("curve has " + std::to_string(knots_.size()) + " knot values for " +
                         std::to_string(grid_.size()) + " grid points");
  }
}

double PiecewiseLinearCurve::evaluate(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("evaluation point outside [0, 1]");
  const auto pts = grid_.points();
  if (s <= pts.front()) return knots_.front();
  if (s >= pts.back()) return knots_.back();
  const auto it = std::lower_bound(pts.begin(), pts.end(), s);
  const auto hi = static_cast<std::size_t>(it - pts.begin());
  if (*it == s) return knots_[hi];
  const std::size_t lo = hi - 1;
  const double w = (s - pts[lo]) / (pts[hi] - pts[lo]);
  return knots_[lo] + w * (knots_[hi] - knots_[lo]);
}

std::vector<double> PiecewiseLinearCurve::dense_trace(std::size_t resolution) const {
  if (resolution < 2) throw DomainError("trace resolution must be at least 2");
  std::vector<double> out(resolution);
  for (std::size_t k = 0; k < resolution; ++k) {
    out[k] = evaluate(static_cast<double>(k) / static_cast<double>(resolution - 1));
  }
  return out;
}

PiecewiseLinearCurve interpolate(const FactorFit& fit, std::size_t t) {
  const auto T = static_cast<std::size_t>(fit.signals.rows());
  if (t < 1 || t > T) {
    throw DomainError("curve index " + std::to_string(t) + " outside [1, " + std::to_string(T) + "]");
  }
  const Eigen::VectorXd row = fit.signals.row(static_cast<Eigen::Index>(t - 1));
  return PiecewiseLinearCurve(fit.grid, std::vector<double>(row.data(), row.data() + row.size()));
}

Eigen::MatrixXd dense_traces(const FactorFit& fit, std::size_t resolution) {
  if (resolution < 2) throw DomainError("trace resolution must be at least 2");
  const auto T = fit.signals.rows();
  Eigen::MatrixXd out(T + 1, static_cast<Eigen::Index>(resolution));
  for (std::size_t k = 0; k < resolution; ++k) {
    out(0, static_cast<Eigen::Index>(k)) = static_cast<double>(k) / static_cast<double>(resolution - 1);
  }
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto trace = interpolate(fit, static_cast<std::size_t>(t) + 1).dense_trace(resolution);
    for (std::size_t k = 0; k < resolution; ++k) out(t + 1, static_cast<Eigen::Index>(k)) = trace[k];
  }
  return out;
}

}  // namespace fdf
