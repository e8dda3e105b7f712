#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fdf::io {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Locale-independent parse of a full token; returns false on any junk.
bool parse_double(std::string_view token, double& value);

std::vector<std::string_view> split_csv_line(std::string_view line);

void write_row(std::ostream& out, std::span<const double> values);
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
void write_matrix_file(const std::string& path, const Eigen::MatrixXd& m,
                       const std::vector<std::string>& header = {});

/// Reads a purely numeric CSV (no header) into a matrix.
Eigen::MatrixXd read_matrix_file(const std::string& path);

std::uint64_t fnv1a(std::span<const unsigned char> bytes,
                    std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);
std::string hash_file(const std::string& path);

}  // namespace fdf::io
