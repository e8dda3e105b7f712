#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fdf {

/// Common observation points 0 <= s_1 < ... < s_p <= 1 shared by all curves.
class SampleGrid {
 public:
  /// Throws DimensionError for p < 2 and DomainError for points that are
  /// unordered or outside [0, 1].
  explicit SampleGrid(std::vector<double> points);

  /// Midpoint grid s_i = (i - 0.5) / p.
  static SampleGrid midpoints(std::size_t p);

  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const { return points_; }

  /// Largest gap between consecutive points.
  double mesh() const;

  /// True when all gaps equal 1/p (within a relative 1e-9).
  bool is_equidistant() const;

  /// 64-bit FNV-1a over the IEEE-754 bytes of the points, as 16 hex digits.
  std::string hash() const;

  friend bool operator==(const SampleGrid&, const SampleGrid&) = default;

 private:
  std::vector<double> points_;
};

/// T x p panel of raw measurements; row t holds curve t on the grid.
class ObservationPanel {
 public:
  ObservationPanel(Eigen::MatrixXd values, SampleGrid grid);

  /// Panel on the midpoint grid.
  explicit ObservationPanel(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  const SampleGrid& grid() const { return grid_; }
  std::size_t curves() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t points() const { return static_cast<std::size_t>(values_.cols()); }

 private:
  Eigen::MatrixXd values_;
  SampleGrid grid_;
};

/// Estimated mean curve evaluated on the grid.
struct MeanVector {
  Eigen::VectorXd values;
};

enum class HeaderMode { kNone, kGridRow };

/// Reads a comma-separated panel. Without a header the midpoint grid is used.
ObservationPanel load_panel(std::istream& in, HeaderMode header = HeaderMode::kNone);
ObservationPanel load_panel_file(const std::string& path,
                                 HeaderMode header = HeaderMode::kNone);

/// Writes the grid header row followed by one row per curve. Numbers are
/// printed in shortest round-trip form, so reading back is bit-exact.
void write_panel(std::ostream& out, const ObservationPanel& panel);

MeanVector column_mean(const ObservationPanel& panel);
ObservationPanel center(const ObservationPanel& panel, const MeanVector& mean);

/// Fills missing cells (empty, "NA", "nan") by linear interpolation within
/// each row, extending the nearest observed value at the row edges.
/// Rows without any observed value are rejected.
ObservationPanel impute_panel(std::istream& in, HeaderMode header = HeaderMode::kNone);

}  // namespace fdf
