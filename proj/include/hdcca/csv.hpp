#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace hdcca {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Headerless CSV, one matrix row per line, full round-trip precision.
void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::MatrixXd& m);

/// Reads a headerless numeric CSV. Every line must have the same number of
/// fields; blank lines are skipped.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

}  // namespace hdcca
