#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "hdcca/rng.hpp"
#include "hdcca/spiked_model.hpp"

namespace hdcca {

/// One draw of n paired observations. Columns of `x` and `y` are samples.
/// `z1` and `z2` are the latent standard-normal rows feeding x1 and y1
/// (rows 1 and d+1 of the 2d x n latent matrix), kept for the first-correlation
/// limit which must be evaluated on the same draw.
struct DataSet {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  Eigen::VectorXd z1;
  Eigen::VectorXd z2;
  StreamKey seed_record;

  long samples() const { return static_cast<long>(x.cols()); }
};

/// rows x cols i.i.d. N(0,1) entries, filled column by column from `stream`.
Eigen::MatrixXd gaussian_matrix(long rows, long cols, Philox4x32& stream);

/// Draws n columns of (X; Y) ~ N(0, Sigma_T) as factor * Z. Only the four core
/// rows mix latent coordinates; every bulk row is a scaled latent row.
DataSet generate_dataset(const PopulationModel& m, const StructuredSqrt& s,
                         long n, StreamKey key);

/// Writes x.csv, y.csv, z1.csv, z2.csv into `dir` (headerless, rows are
/// dimensions).
void export_dataset(const DataSet& data, const std::filesystem::path& dir);

}  // namespace hdcca
