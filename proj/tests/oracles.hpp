#pragma once

// Reference computations used only by tests. Each one takes a different
// numerical route from the library so the two can check each other.

#include <Eigen/Dense>
#include <algorithm>
#include <random>

namespace hdcca::test {

/// Eigenpairs of the dense d x d sample covariance (1/n) X X^T, descending.
struct DenseSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

inline DenseSpectrum dense_covariance_spectrum(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd s = x * x.transpose() / static_cast<double>(x.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

/// Classical CCA from the symmetric-definite generalized eigenproblem
///   [0 Sxy; Syx 0] w = rho [Sxx 0; 0 Syy] w
/// on dense (uncentered) covariances. Needs n well above d.
struct DenseCca {
  Eigen::VectorXd rho;   // descending, length min(dx, dy)
  Eigen::MatrixXd wx;    // unit columns
  Eigen::MatrixXd wy;
};

inline DenseCca dense_classical_cca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const double n = static_cast<double>(x.cols());
  const Eigen::Index dx = x.rows(), dy = y.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dx + dy, dx + dy);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dx + dy, dx + dy);
  const Eigen::MatrixXd sxy = x * y.transpose() / n;
  a.topRightCorner(dx, dy) = sxy;
  a.bottomLeftCorner(dy, dx) = sxy.transpose();
  b.topLeftCorner(dx, dx) = x * x.transpose() / n;
  b.bottomRightCorner(dy, dy) = y * y.transpose() / n;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, b);
  const Eigen::Index k = std::min(dx, dy);
  DenseCca out;
  out.rho.resize(k);
  out.wx.resize(dx, k);
  out.wy.resize(dy, k);
  const Eigen::Index top = dx + dy - 1;
  for (Eigen::Index i = 0; i < k; ++i) {
    out.rho(i) = es.eigenvalues()(top - i);
    out.wx.col(i) = es.eigenvectors().col(top - i).head(dx).normalized();
    out.wy.col(i) = es.eigenvectors().col(top - i).tail(dy).normalized();
  }
  return out;
}

/// Dense whitened cross-covariance with pseudoinverse square roots cut at the
/// same relative tolerance the library uses.
inline Eigen::MatrixXd dense_whitened_operator(const Eigen::MatrixXd& x,
                                               const Eigen::MatrixXd& y,
                                               double rank_tol) {
  const double n = static_cast<double>(x.cols());
  auto inv_sqrt = [&](const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const double top = es.eigenvalues().maxCoeff();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(s.rows());
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      if (es.eigenvalues()(i) > rank_tol * top) w(i) = 1.0 / std::sqrt(es.eigenvalues()(i));
    return Eigen::MatrixXd(es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose());
  };
  return inv_sqrt(x * x.transpose() / n) * (x * y.transpose() / n) *
         inv_sqrt(y * y.transpose() / n);
}

/// |<u, v>| close to 1 for unit vectors equal up to sign.
inline double sign_free_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return std::min((u - v).norm(), (u + v).norm());
}

inline Eigen::MatrixXd random_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(gen);
  return m;
}

}  // namespace hdcca::test
