#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string_view>

#include "hdcca/spiked_model.hpp"

namespace hdcca {

/// Constants of the d -> infinity limit of the first sample canonical
/// correlation when alpha > 1. c1 >= c2 are the eigenvalues of
/// [[sigma2_x, rho sx sy], [rho sx sy, sigma2_y]]; (a1, a2) and (b1, b2) are
/// the corresponding unit eigenvectors, with a2, b2 > 0.
///
/// The limit is cos(m1, m2) with
///   m1 = m1_coef_z1 * z1 + m1_coef_z2 * z2,
///   m2 = m2_coef_z1 * z1 + m2_coef_z2 * z2.
struct Theorem1Constants {
  double c1 = 0.0;
  double c2 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double m1_coef_z1 = 0.0;
  double m1_coef_z2 = 0.0;
  double m2_coef_z1 = 0.0;
  double m2_coef_z2 = 0.0;
};

/// Throws std::invalid_argument for non-positive variances, rho outside
/// (0, 1], and "degenerate: rho=0" when no correlated pair exists.
Theorem1Constants theorem1_constants(double sigma2_x, double sigma2_y, double rho);

/// Cosine similarity of m1 and m2 built from the latent rows z1, z2.
double limit_rho1(const Eigen::Ref<const Eigen::VectorXd>& z1,
                  const Eigen::Ref<const Eigen::VectorXd>& z2,
                  const Theorem1Constants& c);

enum class Regime { AlphaAbove1, AlphaBelow1 };

std::string_view to_string(Regime r);

/// Limit law of lambda_X1 / max(d^alpha, d): `scale * chi2_n / n + offset`.
/// For alpha < 1 the scale is 0 and the limit is the constant tau2_x / n.
struct EigenvalueLaw {
  double scale = 0.0;
  double offset = 0.0;
  double mean() const { return scale + offset; }
};

/// Limits predicted for a parameter set as d -> infinity with n fixed.
struct LimitPrediction {
  Regime regime = Regime::AlphaAbove1;
  double abs_inner_x_first = 0.0;
  double abs_inner_y_first = 0.0;
  double abs_inner_rest = 0.0;
  /// NaN when alpha > 1: the first correlation converges to a random limit.
  double rho_first = 0.0;
  double rho_rest = 0.0;
  /// Limit of lambda_XYi / d for i >= 2 (tends to 0 when alpha > 1).
  double lambda_xy_rest_over_d = 0.0;
  /// Limit of n * lambda_Xi / d for i >= 2.
  double lambda_x_rest_scaled = 0.0;
  EigenvalueLaw pc_eigval_scale;
};

/// Throws std::invalid_argument("boundary alpha=1 unsupported") at alpha == 1.
LimitPrediction predicted_limits(const SpikedParams& p, long n);

}  // namespace hdcca
