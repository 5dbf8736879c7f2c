#include "hdcca/sampling.hpp"

#include <random>
#include <stdexcept>

#include "hdcca/csv.hpp"

namespace hdcca {

Eigen::MatrixXd gaussian_matrix(long rows, long cols, Philox4x32& stream) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("gaussian_matrix: rows and cols must be >= 1");
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) z(i, j) = normal(stream);
  return z;
}

DataSet generate_dataset(const PopulationModel& m, const StructuredSqrt& s,
                         long n, StreamKey key) {
  if (n < 2) throw std::invalid_argument("generate_dataset: n must be >= 2");
  const long d = m.dim();
  Philox4x32 stream(key);
  const Eigen::MatrixXd z = gaussian_matrix(2 * d, n, stream);

  DataSet out;
  out.seed_record = key;
  out.x = s.bulk_x * z.topRows(d);
  out.y = s.bulk_y * z.bottomRows(d);

  const auto idx = core_indices(d);
  Eigen::Matrix<double, 4, Eigen::Dynamic> latent(4, n);
  for (int i = 0; i < 4; ++i) latent.row(i) = z.row(idx[i]);
  const Eigen::Matrix<double, 4, Eigen::Dynamic> mixed = s.core4 * latent;
  out.x.row(0) = mixed.row(0);
  out.x.row(1) = mixed.row(1);
  out.y.row(0) = mixed.row(2);
  out.y.row(1) = mixed.row(3);

  out.z1 = z.row(idx[0]).transpose();
  out.z2 = z.row(idx[2]).transpose();
  return out;
}

void export_dataset(const DataSet& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "x.csv", data.x);
  write_matrix_csv(dir / "y.csv", data.y);
  write_matrix_csv(dir / "z1.csv", data.z1.transpose());
  write_matrix_csv(dir / "z2.csv", data.z2.transpose());
}

}  // namespace hdcca
