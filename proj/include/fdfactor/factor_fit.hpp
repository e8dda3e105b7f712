#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdfactor/panel.hpp"

namespace fdf {

/// Eigendecomposition of the T x T Gram matrix (1/T) Yc Yc' of a centered
/// panel Yc. Computed once and shared by fits of different orders.
///
/// The eigenproblem is solved on the smaller of the T x T and p x p sides;
/// p-side eigenvectors v are mapped to e = Yc v / sqrt(T gamma). Directions
/// with zero eigenvalue are completed to an orthonormal set.
struct GramDecomposition {
  ObservationPanel panel;     // the original, uncentered observations
  MeanVector mean;
  Eigen::MatrixXd centered;   // T x p
  Eigen::VectorXd eigenvalues;  // descending, length min(T, p)
  Eigen::MatrixXd eigvecs;      // T x min(T, p), orthonormal columns

  std::size_t max_order() const;  // min(T - 1, p)
};

GramDecomposition decompose(const ObservationPanel& panel);

/// PCA estimate of an L-factor model and its common components.
struct FactorFit {
  std::size_t order = 0;
  Eigen::MatrixXd eigvecs;          // E, T x L
  Eigen::MatrixXd scores;           // F = sqrt(T) E
  Eigen::MatrixXd loadings;         // B = Yc' F / T, p x L
  Eigen::VectorXd gram_eigenvalues;  // all available, descending
  Eigen::MatrixXd signals;          // X = 1 mu' + Yc E E'
  Eigen::MatrixXd residuals;        // U = Y - X
  MeanVector mean;
  SampleGrid grid;
  std::vector<std::string> warnings;

  double residual_sum_of_squares() const { return residuals.squaredNorm(); }
};

/// Fits L factors; requires 1 <= L <= min(T - 1, p).
FactorFit fit(const ObservationPanel& panel, std::size_t order);
FactorFit fit(const GramDecomposition& decomposition, std::size_t order);

/// L = 0: every signal is the column mean; scores and loadings are empty.
FactorFit mean_only_fit(const ObservationPanel& panel);

/// Signal reconstruction 1 mu' + Yc E E' for an arbitrary orthonormal E.
Eigen::MatrixXd project_signals(const Eigen::MatrixXd& centered, const MeanVector& mean,
                                const Eigen::MatrixXd& eigvecs);

ObservationPanel residual_panel(const FactorFit& fit);
ObservationPanel signal_panel(const FactorFit& fit);

/// Flips each column so that its entry of largest magnitude is positive
/// (ties go to the lowest index).
void normalize_signs(Eigen::MatrixXd& columns);

}  // namespace fdf
