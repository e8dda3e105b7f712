#include "fdfactor/factor_fit.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fdfactor/errors.hpp"

namespace fdf {

namespace {

struct SymmetricEigen {
  Eigen::VectorXd values;  // descending, clamped at 0
  Eigen::MatrixXd vectors;
};

SymmetricEigen symmetric_eigen_descending(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "symmetric eigensolver did not converge on a " << gram.rows() << "x" << gram.cols()
        << " Gram matrix (trace " << gram.trace() << ", Frobenius norm " << gram.norm()
        << ", diagonal range [" << gram.diagonal().minCoeff() << ", "
        << gram.diagonal().maxCoeff() << "])";
    throw NumericalError(msg.str());
  }
  const Eigen::Index n = gram.rows();
  SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = std::max(0.0, solver.eigenvalues()(n - 1 - k));
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

}  // namespace

void normalize_signs(Eigen::MatrixXd& columns) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < columns.rows(); ++r) {
      if (std::abs(columns(r, c)) > best) {
        best = std::abs(columns(r, c));
        arg = r;
      }
    }
    if (columns(arg, c) < 0.0) columns.col(c) *= -1.0;
  }
}

std::size_t GramDecomposition::max_order() const {
  const auto T = static_cast<std::size_t>(centered.rows());
  const auto p = static_cast<std::size_t>(centered.cols());
  return std::min(T - 1, p);
}

GramDecomposition decompose(const ObservationPanel& panel) {
  MeanVector mean = column_mean(panel);
  Eigen::MatrixXd centered = panel.values().rowwise() - mean.values.transpose();
  const Eigen::Index T = centered.rows();
  const Eigen::Index p = centered.cols();
  const double inv_t = 1.0 / static_cast<double>(T);

  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigvecs;
  if (T <= p) {
    Eigen::MatrixXd gram = inv_t * (centered * centered.transpose());
    auto eig = symmetric_eigen_descending(gram);
    eigenvalues = std::move(eig.values);
    eigvecs = std::move(eig.vectors);
  } else {
    Eigen::MatrixXd gram = inv_t * (centered.transpose() * centered);
    auto eig = symmetric_eigen_descending(gram);
    eigenvalues = std::move(eig.values);
    eigvecs.resize(T, p);
    const double top = eigenvalues.size() ? eigenvalues(0) : 0.0;
    Eigen::Index mapped = 0;
    for (; mapped < p; ++mapped) {
      const double g = eigenvalues(mapped);
      if (!(top > 0.0) || g <= 1e-10 * top) break;
      eigvecs.col(mapped) = centered * eig.vectors.col(mapped) / std::sqrt(static_cast<double>(T) * g);
    }
    if (mapped < p) {
      // Null directions of Yc Yc': any orthonormal completion will do.
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(eigvecs.leftCols(mapped));
      Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(T, T);
      eigvecs.rightCols(p - mapped) = q.middleCols(mapped, p - mapped);
    }
  }
  normalize_signs(eigvecs);
  return {panel, std::move(mean), std::move(centered), std::move(eigenvalues), std::move(eigvecs)};
}

Eigen::MatrixXd project_signals(const Eigen::MatrixXd& centered, const MeanVector& mean,
                                const Eigen::MatrixXd& eigvecs) {
  Eigen::MatrixXd x = eigvecs * (eigvecs.transpose() * centered);
  x.rowwise() += mean.values.transpose();
  return x;
}

FactorFit fit(const GramDecomposition& d, std::size_t order) {
  const std::size_t max_order = d.max_order();
  if (order < 1 || order > max_order) {
    throw OrderError("factor order L=" + std::to_string(order) + " outside [1, " +
                     std::to_string(max_order) + "] (use --mean-only for L=0)");
  }
  const auto L = static_cast<Eigen::Index>(order);
  const double T = static_cast<double>(d.centered.rows());

  FactorFit f{.order = order,
              .eigvecs = d.eigvecs.leftCols(L),
              .scores = {},
              .loadings = {},
              .gram_eigenvalues = d.eigenvalues,
              .signals = {},
              .residuals = {},
              .mean = d.mean,
              .grid = d.panel.grid(),
              .warnings = {}};
  f.scores = std::sqrt(T) * f.eigvecs;
  f.loadings = d.centered.transpose() * f.scores / T;
  f.signals = project_signals(d.centered, d.mean, f.eigvecs);
  f.residuals = d.panel.values() - f.signals;

  if (L < d.eigenvalues.size()) {
    const double gap = d.eigenvalues(L - 1) - d.eigenvalues(L);
    if (gap < 1e-10 * d.eigenvalues(0)) {
      std::ostringstream msg;
      msg << "eigenvalue gap between kept order " << order << " and the next is " << gap
          << " (below 1e-10 * gamma_1); the kept subspace is not uniquely determined";
      f.warnings.push_back(msg.str());
    }
  }
  return f;
}

FactorFit fit(const ObservationPanel& panel, std::size_t order) {
  const std::size_t max_order = std::min(panel.curves() - 1, panel.points());
  if (order < 1 || order > max_order) {
    throw OrderError("factor order L=" + std::to_string(order) + " outside [1, " +
                     std::to_string(max_order) + "] (use --mean-only for L=0)");
  }
  return fit(decompose(panel), order);
}

FactorFit mean_only_fit(const ObservationPanel& panel) {
  const GramDecomposition d = decompose(panel);
  Eigen::MatrixXd signals = Eigen::MatrixXd::Zero(d.centered.rows(), d.centered.cols());
  signals.rowwise() += d.mean.values.transpose();
  return {.order = 0,
          .eigvecs = Eigen::MatrixXd(d.centered.rows(), 0),
          .scores = Eigen::MatrixXd(d.centered.rows(), 0),
          .loadings = Eigen::MatrixXd(d.centered.cols(), 0),
          .gram_eigenvalues = d.eigenvalues,
          .signals = signals,
          .residuals = d.panel.values() - signals,
          .mean = d.mean,
          .grid = d.panel.grid(),
          .warnings = {}};
}

ObservationPanel residual_panel(const FactorFit& f) { return ObservationPanel(f.residuals, f.grid); }

ObservationPanel signal_panel(const FactorFit& f) { return ObservationPanel(f.signals, f.grid); }

}  // namespace fdf
