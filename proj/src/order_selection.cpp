#include "fdfactor/order_selection.hpp"

#include <algorithm>
#include <cmath>

#include "fdfactor/errors.hpp"

namespace fdf {

ScreeCurve classic_scree(const EigenSystem& system, std::size_t l_max) {
  const auto available = static_cast<std::size_t>(system.gram_eigenvalues.size());
  if (l_max < 1 || l_max > available) {
    throw DomainError("scree length " + std::to_string(l_max) + " outside [1, " +
                      std::to_string(available) + "]");
  }
  ScreeCurve curve;
  curve.kind = ScreeKind::kEigenvalue;
  for (std::size_t l = 1; l <= l_max; ++l) {
    curve.orders.push_back(l);
    curve.values.push_back(system.gram_eigenvalues(static_cast<Eigen::Index>(l - 1)));
  }
  return curve;
}

ScreeCurve lambda_scree(const GramDecomposition& d, std::size_t l_max,
                        const FrequencySelection& sel) {
  if (l_max < 1 || l_max > d.max_order()) {
    throw OrderError("scree length " + std::to_string(l_max) + " outside [1, " +
                     std::to_string(d.max_order()) + "]");
  }
  ScreeCurve curve;
  curve.kind = ScreeKind::kTestStatistic;
  for (std::size_t l = 1; l <= l_max; ++l) {
    const FactorFit f = fit(d, l);
    const NoiseTestReport report = iid_noise_test(f.residuals, sel);
    curve.orders.push_back(l);
    curve.values.push_back(report.lambda_inf);
    curve.residual_ss.push_back(f.residual_sum_of_squares());
  }
  return curve;
}

ScreeCurve lambda_scree(const ObservationPanel& panel, std::size_t l_max,
                        const FrequencySelection& sel) {
  return lambda_scree(decompose(panel), l_max, sel);
}

PlateauChoice suggest_plateau_L(const ScreeCurve& curve, double rel_tol) {
  const std::size_t l_max = curve.values.size();
  if (l_max < 4) throw DomainError("plateau rule needs a curve of length >= 4");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DomainError("rel_tol must lie in (0, 1)");
  const auto& v = curve.values;
  const double baseline = *std::min_element(v.begin(), v.end());
  const double tol = rel_tol * std::abs(v.front() - baseline);
  // 0-based: order l + 1 qualifies when steps l..min(l + 2, l_max - 2) are small.
  for (std::size_t l = 0; l + 1 < l_max; ++l) {
    const std::size_t last = std::min(l + 2, l_max - 2);
    bool flat = true;
    for (std::size_t k = l; k <= last && flat; ++k) flat = std::abs(v[k + 1] - v[k]) <= tol;
    if (flat) return {l + 1, true};
  }
  return {l_max, false};
}

}  // namespace fdf
