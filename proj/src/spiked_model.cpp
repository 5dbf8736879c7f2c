#include "hdcca/spiked_model.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hdcca {
namespace {

using Real = boost::multiprecision::cpp_bin_float_100;
using Mat4 = std::array<std::array<Real, 4>, 4>;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ParameterError(field + ": " + what);
}

void require_positive(double v, const char* field) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    std::ostringstream os;
    os << "must be positive and finite (got " << v << ")";
    fail(field, os.str());
  }
}

// Cyclic Jacobi. On return `a` is diagonal (the eigenvalues) and the columns
// of `v` are the eigenvectors.
void jacobi_eigen(Mat4& a, Mat4& v) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) v[i][j] = (i == j) ? Real(1) : Real(0);

  const Real eps = std::numeric_limits<Real>::epsilon();
  for (int sweep = 0; sweep < 100; ++sweep) {
    Real off = 0, total = 0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        total += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    }
    if (off <= eps * eps * total) return;

    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        if (a[p][q] == 0) continue;
        const Real theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const Real t = (theta >= 0 ? Real(1) : Real(-1)) /
                       (abs(theta) + sqrt(theta * theta + 1));
        const Real c = 1 / sqrt(t * t + 1);
        const Real s = t * c;
        for (int k = 0; k < 4; ++k) {
          const Real akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const Real apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 4; ++k) {
          const Real vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
}

}  // namespace

void validate_params(const SpikedParams& p) {
  require_positive(p.sigma2_x, "sigma2_x");
  require_positive(p.tau2_x, "tau2_x");
  require_positive(p.sigma2_y, "sigma2_y");
  require_positive(p.tau2_y, "tau2_y");
  if (!std::isfinite(p.alpha) || p.alpha < 0.0) fail("alpha", "must be >= 0");
  if (!std::isfinite(p.rho) || p.rho < 0.0 || p.rho > 1.0)
    fail("rho", "rho out of [0,1]");
  for (auto [v, name] : {std::pair{p.theta_x, "theta_x"},
                         std::pair{p.theta_y, "theta_y"}}) {
    if (!std::isfinite(v) || v < 0.0 || v > std::numbers::pi)
      fail(name, "angle out of [0,pi]");
  }
  if (p.d < 3) fail("d", "d must be >= 3");
  const double spike_x = p.sigma2_x * std::pow(static_cast<double>(p.d), p.alpha);
  const double spike_y = p.sigma2_y * std::pow(static_cast<double>(p.d), p.alpha);
  if (!std::isfinite(spike_x) || !std::isfinite(spike_y))
    fail("alpha", "spike variance sigma2 * d^alpha overflows");
}

PopulationModel build_population_model(const SpikedParams& p) {
  validate_params(p);
  PopulationModel m;
  m.params = p;
  const double d_alpha = std::pow(static_cast<double>(p.d), p.alpha);

  m.sigma_x_diag = Eigen::VectorXd::Constant(p.d, p.tau2_x);
  m.sigma_y_diag = Eigen::VectorXd::Constant(p.d, p.tau2_y);
  m.sigma_x_diag(0) = p.sigma2_x * d_alpha;
  m.sigma_y_diag(0) = p.sigma2_y * d_alpha;

  const double cx = std::cos(p.theta_x), sx = std::sin(p.theta_x);
  const double cy = std::cos(p.theta_y), sy = std::sin(p.theta_y);
  m.psi_x = Eigen::VectorXd::Zero(p.d);
  m.psi_y = Eigen::VectorXd::Zero(p.d);
  m.psi_x(0) = cx;
  m.psi_x(1) = sx;
  m.psi_y(0) = cy;
  m.psi_y(1) = sy;

  m.a_norm = std::sqrt(p.sigma2_x * d_alpha * cx * cx + p.tau2_x * sx * sx);
  m.b_norm = std::sqrt(p.sigma2_y * d_alpha * cy * cy + p.tau2_y * sy * sy);

  // Each entry is rho * (Sigma_X psi_X)_i (Sigma_Y psi_Y)_j / (A B), grouped
  // so that d^(2 alpha) is never formed.
  const Eigen::Vector2d u(p.sigma2_x * d_alpha * cx / m.a_norm,
                          p.tau2_x * sx / m.a_norm);
  const Eigen::Vector2d v(p.sigma2_y * d_alpha * cy / m.b_norm,
                          p.tau2_y * sy / m.b_norm);
  m.cross_block = p.rho * u * v.transpose();
  return m;
}

Eigen::Matrix4d PopulationModel::joint_core() const {
  Eigen::Matrix4d c = Eigen::Matrix4d::Zero();
  c(0, 0) = sigma_x_diag(0);
  c(1, 1) = sigma_x_diag(1);
  c(2, 2) = sigma_y_diag(0);
  c(3, 3) = sigma_y_diag(1);
  c.block<2, 2>(0, 2) = cross_block;
  c.block<2, 2>(2, 0) = cross_block.transpose();
  return c;
}

Eigen::MatrixXd PopulationModel::joint_dense() const {
  const long d = dim();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  t.topLeftCorner(d, d).diagonal() = sigma_x_diag;
  t.bottomRightCorner(d, d).diagonal() = sigma_y_diag;
  t.block(0, d, 2, 2) = cross_block;
  t.block(d, 0, 2, 2) = cross_block.transpose();
  return t;
}

StructuredSqrt joint_sqrt(const PopulationModel& m) {
  const SpikedParams& p = m.params;
  const Eigen::Matrix4d core = m.joint_core();
  Mat4 a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a[i][j] = core(i, j);
  Mat4 v;
  jacobi_eigen(a, v);

  Real lambda_max = 0, lambda_min = a[0][0];
  for (int i = 0; i < 4; ++i) {
    lambda_max = std::max(lambda_max, a[i][i]);
    lambda_min = std::min(lambda_min, a[i][i]);
  }
  if (lambda_min < -Real(1e-10) * lambda_max) {
    std::ostringstream os;
    os << "joint covariance core is not positive semidefinite (min eigenvalue "
       << static_cast<double>(lambda_min) << ", max "
       << static_cast<double>(lambda_max) << ")";
    throw NotPsdError(os.str());
  }

  std::array<Real, 4> root;
  for (int i = 0; i < 4; ++i) root[i] = a[i][i] > 0 ? sqrt(a[i][i]) : Real(0);

  StructuredSqrt s;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      Real acc = 0;
      for (int k = 0; k < 4; ++k) acc += v[i][k] * root[k] * v[j][k];
      s.core4(i, j) = s.core4(j, i) = static_cast<double>(acc);
    }
  }
  s.bulk_x = std::sqrt(p.tau2_x);
  s.bulk_y = std::sqrt(p.tau2_y);
  return s;
}

Eigen::MatrixXd StructuredSqrt::dense(long d) const {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  f.topLeftCorner(d, d).diagonal().setConstant(bulk_x);
  f.bottomRightCorner(d, d).diagonal().setConstant(bulk_y);
  const auto idx = core_indices(d);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) f(idx[i], idx[j]) = core4(i, j);
  return f;
}

}  // namespace hdcca
