#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fdfactor/factor_fit.hpp"
#include "fdfactor/noise_test.hpp"
#include "fdfactor/panel.hpp"
#include "fdfactor/spectral.hpp"

namespace fdf {

enum class ScreeKind { kEigenvalue, kTestStatistic };

struct ScreeCurve {
  ScreeKind kind = ScreeKind::kEigenvalue;
  std::vector<std::size_t> orders;  // 1..l_max
  std::vector<double> values;
  /// Residual sum of squares per order (test-statistic curves only).
  std::vector<double> residual_ss;
};

/// (l, gamma_l) for l = 1..l_max.
ScreeCurve classic_scree(const EigenSystem& system, std::size_t l_max);

/// (l, Lambda_inf(l)) where Lambda_inf(l) tests the residuals of an l-factor
/// fit. One Gram decomposition serves all orders.
ScreeCurve lambda_scree(const ObservationPanel& panel, std::size_t l_max,
                        const FrequencySelection& sel);
ScreeCurve lambda_scree(const GramDecomposition& decomposition, std::size_t l_max,
                        const FrequencySelection& sel);

struct PlateauChoice {
  std::size_t order = 0;
  bool plateau_found = false;
};

/// First order l from which the next (up to three) consecutive steps of the
/// curve all move by at most rel_tol * |v_1 - min v|. Falls back to l_max
/// with plateau_found = false. Needs l_max >= 4.
PlateauChoice suggest_plateau_L(const ScreeCurve& curve, double rel_tol = 0.1);

}  // namespace fdf
