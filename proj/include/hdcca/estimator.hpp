#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace hdcca {

/// Raised for data the estimator cannot handle: mismatched shapes, all-zero
/// blocks, or more components requested than directions exist.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Spectrum of one block's sample covariance (1/n) X X^T, restricted to the
/// at most min(d, n) directions spanned by the data.
struct SideSpectrum {
  Eigen::MatrixXd basis;   ///< d x m sample eigenvectors, orthonormal columns
  Eigen::VectorXd values;  ///< m eigenvalues, descending, >= 0
  Eigen::MatrixXd scores;  ///< n x m right singular vectors of the data block
  Eigen::Index retained = 0;  ///< eigenvalues above rank_tol * values(0)
};

/// Sample covariance structure needed by CCA. Both blocks are truncated to the
/// common retained rank; directions past it stay available in the spectra.
struct SampleMoments {
  SideSpectrum x;
  SideSpectrum y;
  Eigen::Index rank = 0;
  Eigen::MatrixXd sxy_core;  ///< rank x rank, Xi_X^T Sigma_XY Xi_Y
  long n = 0;
  bool centered = false;

  auto sxx_basis() const { return x.basis.leftCols(rank); }
  auto syy_basis() const { return y.basis.leftCols(rank); }
  auto sxx_vals() const { return x.values.head(rank); }
  auto syy_vals() const { return y.values.head(rank); }
};

inline constexpr double kDefaultRankTol = 1e-10;

/// Eigen-decomposes both sample covariances without forming any d x d matrix.
/// x and y are d x n with matching d and n.
/// Each block is reduced by a row-sorted, QR-preconditioned Jacobi SVD, which
/// keeps small eigenvalues accurate relative to their own size even when one
/// coordinate dominates the block by many orders of magnitude.
SampleMoments sample_moments(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                             bool center = false,
                             double rank_tol = kDefaultRankTol);

/// The rank x rank core of the whitened cross-covariance
/// Sigma_X^{-1/2} Sigma_XY Sigma_Y^{-1/2} (pseudoinverse square roots).
Eigen::MatrixXd whitened_correlation_core(const SampleMoments& m);

/// All singular values of the sample cross-covariance (1/n) X Y^T, descending.
Eigen::VectorXd cross_covariance_singular_values(const SampleMoments& m);

struct CcaOptions {
  bool center = false;
  double rank_tol = kDefaultRankTol;
  /// Components to report; 0 reports every retained component.
  Eigen::Index k = 0;
};

struct CcaDiagnostics {
  Eigen::Index rank_x = 0;
  Eigen::Index rank_y = 0;
  Eigen::Index rank = 0;
  /// Components reported past `rank`. These carry rho_hat = 0 and take the
  /// next sample eigenvectors as weight vectors.
  Eigen::Index padded = 0;
  /// Smallest lambda_r / lambda_1 over both blocks at the retained rank.
  double min_retained_ratio = 0.0;
};

struct CcaEstimate {
  Eigen::VectorXd rho_hat;   ///< descending, in [0, 1]
  Eigen::MatrixXd psi_x_hat; ///< d x k, unit columns
  Eigen::MatrixXd psi_y_hat;
  CcaDiagnostics diagnostics;

  Eigen::Index components() const { return rho_hat.size(); }
};

CcaEstimate cca_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    const CcaOptions& options = {});

/// cca_fit on precomputed moments; `k` = 0 reports every retained component.
CcaEstimate cca_from_moments(const SampleMoments& m, Eigen::Index k = 0);

/// Agreement between two unit vectors. `angle_deg` ignores sign and lies in
/// [0, 90].
struct Alignment {
  double inner = 0.0;
  double abs_inner = 0.0;
  double angle_deg = 0.0;
};

Alignment alignment(const Eigen::Ref<const Eigen::VectorXd>& v,
                    const Eigen::Ref<const Eigen::VectorXd>& w);

}  // namespace hdcca
