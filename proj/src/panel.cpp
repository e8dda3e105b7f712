#include "fdfactor/panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>

#include "fdfactor/errors.hpp"
#include "fdfactor/io.hpp"

namespace fdf {

SampleGrid::SampleGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DimensionError("grid needs at least 2 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double s = points_[i];
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
      throw DomainError("grid point " + std::to_string(i + 1) + " outside [0, 1]");
    }
    if (i > 0 && !(s > points_[i - 1])) {
      throw DomainError("grid points must be strictly increasing (at point " +
                        std::to_string(i + 1) + ")");
    }
  }
}

SampleGrid SampleGrid::midpoints(std::size_t p) {
  std::vector<double> s(p);
  for (std::size_t i = 0; i < p; ++i) s[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(p);
  return SampleGrid(std::move(s));
}

double SampleGrid::mesh() const {
  double delta = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) delta = std::max(delta, points_[i] - points_[i - 1]);
  return delta;
}

bool SampleGrid::is_equidistant() const {
  const double h = 1.0 / static_cast<double>(points_.size());
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (std::abs(points_[i] - points_[i - 1] - h) > 1e-9 * h) return false;
  }
  return true;
}

std::string SampleGrid::hash() const {
  std::vector<unsigned char> bytes(points_.size() * sizeof(double));
  std::memcpy(bytes.data(), points_.data(), bytes.size());
  return io::hex64(io::fnv1a(bytes));
}

ObservationPanel::ObservationPanel(Eigen::MatrixXd values, SampleGrid grid)
    : values_(std::move(values)), grid_(std::move(grid)) {
  if (static_cast<std::size_t>(values_.cols()) != grid_.size()) {
    throw DimensionError("panel has " + std::to_string(values_.cols()) +
                         " columns but the grid has " + std::to_string(grid_.size()) + " points");
  }
  if (values_.rows() < 2) throw DimensionError("panel needs at least 2 curves");
  if (!values_.allFinite()) throw DomainError("panel contains non-finite values");
}

ObservationPanel::ObservationPanel(Eigen::MatrixXd values)
    : ObservationPanel(values, SampleGrid::midpoints(static_cast<std::size_t>(values.cols()))) {}

namespace {

bool is_missing_token(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan";
}

struct RawTable {
  std::optional<std::vector<double>> header;
  std::vector<std::vector<std::optional<double>>> rows;
};

RawTable read_table(std::istream& in, HeaderMode header, bool allow_missing) {
  RawTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = io::split_csv_line(line);
    if (width == 0) {
      width = cells.size();
    } else if (cells.size() != width) {
      throw FormatError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(width));
    }
    const bool is_header = header == HeaderMode::kGridRow && !table.header;
    std::vector<std::optional<double>> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (io::parse_double(cells[c], v) && std::isfinite(v)) {
        row[c] = v;
        continue;
      }
      if (allow_missing && !is_header && is_missing_token(cells[c])) continue;
      const std::string where =
          " at row " + std::to_string(line_no) + ", column " + std::to_string(c + 1);
      if (is_missing_token(cells[c])) {
        throw ParseError("missing value" + where + " (run `impute` first)", line_no, c + 1);
      }
      throw ParseError("non-numeric cell '" + std::string(cells[c]) + "'" + where, line_no, c + 1);
    }
    if (is_header) {
      std::vector<double> grid(row.size());
      for (std::size_t c = 0; c < row.size(); ++c) grid[c] = *row[c];
      table.header = std::move(grid);
    } else {
      table.rows.push_back(std::move(row));
    }
  }
  if (width < 2) throw DimensionError("panel needs at least 2 columns");
  if (table.rows.size() < 2) throw DimensionError("panel needs at least 2 curves");
  return table;
}

SampleGrid grid_for(const RawTable& table, std::size_t p) {
  return table.header ? SampleGrid(*table.header) : SampleGrid::midpoints(p);
}

}  // namespace

ObservationPanel load_panel(std::istream& in, HeaderMode header) {
  const RawTable table = read_table(in, header, false);
  const std::size_t p = table.rows.front().size();
  Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t t = 0; t < table.rows.size(); ++t)
    for (std::size_t i = 0; i < p; ++i)
      values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = *table.rows[t][i];
  return ObservationPanel(std::move(values), grid_for(table, p));
}

ObservationPanel load_panel_file(const std::string& path, HeaderMode header) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return load_panel(in, header);
}

void write_panel(std::ostream& out, const ObservationPanel& panel) {
  io::write_row(out, panel.grid().points());
  io::write_matrix(out, panel.values());
}

MeanVector column_mean(const ObservationPanel& panel) {
  return {panel.values().colwise().mean().transpose()};
}

ObservationPanel center(const ObservationPanel& panel, const MeanVector& mean) {
  if (static_cast<std::size_t>(mean.values.size()) != panel.points()) {
    throw DimensionError("mean has length " + std::to_string(mean.values.size()) +
                         ", panel has " + std::to_string(panel.points()) + " points");
  }
  Eigen::MatrixXd centered = panel.values().rowwise() - mean.values.transpose();
  return ObservationPanel(std::move(centered), panel.grid());
}

ObservationPanel impute_panel(std::istream& in, HeaderMode header) {
  const RawTable table = read_table(in, header, true);
  const std::size_t p = table.rows.front().size();
  const SampleGrid grid = grid_for(table, p);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t t = 0; t < table.rows.size(); ++t) {
    const auto& row = table.rows[t];
    std::vector<std::size_t> observed;
    for (std::size_t i = 0; i < p; ++i)
      if (row[i]) observed.push_back(i);
    if (observed.empty()) {
      throw FormatError("row " + std::to_string(t + 1) + " has no observed values to impute from");
    }
    std::size_t next = 0;  // index into observed of the first observed point >= i
    for (std::size_t i = 0; i < p; ++i) {
      while (next < observed.size() && observed[next] < i) ++next;
      double v = 0.0;
      if (row[i]) {
        v = *row[i];
      } else if (next == 0) {
        v = *row[observed.front()];
      } else if (next == observed.size()) {
        v = *row[observed.back()];
      } else {
        const std::size_t a = observed[next - 1];
        const std::size_t b = observed[next];
        v = (*row[a] * (grid[b] - grid[i]) + *row[b] * (grid[i] - grid[a])) / (grid[b] - grid[a]);
      }
      values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return ObservationPanel(std::move(values), grid);
}

}  // namespace fdf
