#include "hdcca/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hdcca {

Theorem1Constants theorem1_constants(double sigma2_x, double sigma2_y, double rho) {
  if (!(sigma2_x > 0.0) || !(sigma2_y > 0.0) || !std::isfinite(sigma2_x) ||
      !std::isfinite(sigma2_y))
    throw std::invalid_argument("theorem1_constants: variances must be positive");
  if (rho == 0.0) throw std::invalid_argument("degenerate: rho=0");
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("theorem1_constants: rho out of (0,1]");

  const double sx = std::sqrt(sigma2_x), sy = std::sqrt(sigma2_y);
  const double disc = sigma2_x * sigma2_x - 2.0 * sigma2_x * sigma2_y +
                      4.0 * sigma2_x * sigma2_y * rho * rho + sigma2_y * sigma2_y;

  Theorem1Constants c;
  c.c1 = 0.5 * (sigma2_x + sigma2_y + std::sqrt(disc));
  // Product of the eigenvalues is the determinant; this avoids cancellation
  // in (sum - sqrt(disc)) / 2 as rho -> 1.
  c.c2 = sigma2_x * sigma2_y * (1.0 - rho * rho) / c.c1;

  const double t1 = (c.c1 - sigma2_y) / (rho * sx * sy);
  const double t2 = (c.c2 - sigma2_y) / (rho * sx * sy);
  c.a1 = t1 / std::sqrt(t1 * t1 + 1.0);
  c.a2 = 1.0 / std::sqrt(t1 * t1 + 1.0);
  c.b1 = t2 / std::sqrt(t2 * t2 + 1.0);
  c.b2 = 1.0 / std::sqrt(t2 * t2 + 1.0);

  const double r1 = std::sqrt(c.c1), r2 = std::sqrt(c.c2);
  c.m1_coef_z1 = r1 * c.a1 * c.a1 + r2 * c.b1 * c.b1;
  c.m1_coef_z2 = r1 * c.a1 * c.a2 + r2 * c.b1 * c.b2;
  c.m2_coef_z1 = c.m1_coef_z2;
  c.m2_coef_z2 = c.m1_coef_z1;
  return c;
}

double limit_rho1(const Eigen::Ref<const Eigen::VectorXd>& z1,
                  const Eigen::Ref<const Eigen::VectorXd>& z2,
                  const Theorem1Constants& c) {
  if (z1.size() != z2.size() || z1.size() < 2)
    throw std::invalid_argument("limit_rho1: z1, z2 must share length n >= 2");
  const Eigen::VectorXd m1 = c.m1_coef_z1 * z1 + c.m1_coef_z2 * z2;
  const Eigen::VectorXd m2 = c.m2_coef_z1 * z1 + c.m2_coef_z2 * z2;
  const double n1 = m1.norm(), n2 = m2.norm();
  if (!(n1 > 0.0) || !(n2 > 0.0))
    throw std::invalid_argument("limit_rho1: m1 or m2 has zero norm");
  return std::clamp(m1.dot(m2) / (n1 * n2), -1.0, 1.0);
}

std::string_view to_string(Regime r) {
  return r == Regime::AlphaAbove1 ? "alpha_above_1" : "alpha_below_1";
}

LimitPrediction predicted_limits(const SpikedParams& p, long n) {
  validate_params(p);
  if (n < 1) throw std::invalid_argument("predicted_limits: n must be >= 1");
  if (p.alpha == 1.0) throw std::invalid_argument("boundary alpha=1 unsupported");

  const double nn = static_cast<double>(n);
  LimitPrediction out;
  out.abs_inner_rest = 0.0;
  out.lambda_x_rest_scaled = p.tau2_x;
  if (p.alpha > 1.0) {
    out.regime = Regime::AlphaAbove1;
    out.abs_inner_x_first = std::abs(std::cos(p.theta_x));
    out.abs_inner_y_first = std::abs(std::cos(p.theta_y));
    out.rho_first = std::numeric_limits<double>::quiet_NaN();
    out.rho_rest = 0.0;
    out.lambda_xy_rest_over_d = 0.0;
    out.pc_eigval_scale = {p.sigma2_x, 0.0};
  } else {
    out.regime = Regime::AlphaBelow1;
    out.abs_inner_x_first = 0.0;
    out.abs_inner_y_first = 0.0;
    out.rho_first = 1.0;
    out.rho_rest = 1.0;
    out.lambda_xy_rest_over_d = std::sqrt(p.tau2_x * p.tau2_y) / nn;
    out.pc_eigval_scale = {0.0, p.tau2_x / nn};
  }
  return out;
}

}  // namespace hdcca
