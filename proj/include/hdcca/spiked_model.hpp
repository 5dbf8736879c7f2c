#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>

namespace hdcca {

/// Raised when a parameter set violates the model's invariants. The message
/// names the offending field.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Population parameters of the two-block spiked model. Both blocks share the
/// dimension `d`; the leading eigenvalue of block X is sigma2_x * d^alpha and
/// the remaining d-1 eigenvalues equal tau2_x (likewise for Y). The canonical
/// weight vector of X is cos(theta_x) e1 + sin(theta_x) e2.
struct SpikedParams {
  double sigma2_x = 1.0;
  double tau2_x = 1.0;
  double sigma2_y = 1.0;
  double tau2_y = 1.0;
  double alpha = 0.0;
  double rho = 0.0;
  double theta_x = 0.0;
  double theta_y = 0.0;
  long d = 3;
};

/// Throws ParameterError on the first violated invariant.
void validate_params(const SpikedParams& p);

/// Assembled population covariance. Sigma_X and Sigma_Y are diagonal; the
/// cross-covariance is zero outside its leading 2x2 block.
struct PopulationModel {
  SpikedParams params;
  Eigen::VectorXd sigma_x_diag;
  Eigen::VectorXd sigma_y_diag;
  Eigen::Matrix2d cross_block;
  Eigen::VectorXd psi_x;
  Eigen::VectorXd psi_y;
  double a_norm = 0.0;
  double b_norm = 0.0;

  long dim() const { return params.d; }

  /// The joint covariance restricted to coordinates (x1, x2, y1, y2). Every
  /// other coordinate of the 2d-dimensional joint vector is uncorrelated with
  /// the rest and has variance tau2_x or tau2_y.
  Eigen::Matrix4d joint_core() const;

  /// Dense 2d x 2d joint covariance. Only for small-d testing.
  Eigen::MatrixXd joint_dense() const;
};

PopulationModel build_population_model(const SpikedParams& p);

/// Symmetric square root of the joint covariance in structured form: a 4x4
/// core acting on (x1, x2, y1, y2) and scalar factors on the bulk coordinates.
struct StructuredSqrt {
  Eigen::Matrix4d core4;
  double bulk_x = 1.0;
  double bulk_y = 1.0;

  /// Dense 2d x 2d factor. Only for small-d testing.
  Eigen::MatrixXd dense(long d) const;
};

/// Raised when the joint covariance core is not positive semidefinite.
class NotPsdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Computes the structured square root. The 4x4 eigenproblem is solved in
/// extended precision because the core mixes entries of order d^alpha with
/// entries of order one; double precision would lose the small eigenvalues
/// entirely once d^alpha exceeds ~1e16.
StructuredSqrt joint_sqrt(const PopulationModel& m);

/// Positions of the core coordinates inside the 2d-dimensional joint vector
/// (0-based): x1, x2, y1, y2.
inline std::array<long, 4> core_indices(long d) { return {0, 1, d, d + 1}; }

}  // namespace hdcca
