#include "hdcca/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace hdcca {
namespace {

SideSpectrum block_spectrum(const Eigen::MatrixXd& block, bool centered,
                            double rank_tol, const char* name) {
  const Eigen::Index d = block.rows();
  const Eigen::Index n = block.cols();

  // Householder QR is row-wise stable only when rows arrive in decreasing
  // norm order, so sort them first and undo the permutation on U afterwards.
  const Eigen::VectorXd row_norms = block.rowwise().norm();
  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return row_norms(a) > row_norms(b);
  });
  Eigen::MatrixXd sorted(d, n);
  for (Eigen::Index i = 0; i < d; ++i) sorted.row(i) = block.row(order[i]);

  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
      sorted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (!(s.size() > 0 && s(0) > 0.0))
    throw EstimationError(std::string("degenerate data: ") + name +
                          " has no positive sample variance");

  const Eigen::Index m = std::min(d, centered ? n - 1 : n);
  SideSpectrum out;
  out.basis.resize(d, m);
  for (Eigen::Index i = 0; i < d; ++i)
    out.basis.row(order[i]) = svd.matrixU().row(i).head(m);
  out.values = s.head(m).array().square() / static_cast<double>(n);
  out.scores = svd.matrixV().leftCols(m);

  const double cutoff = rank_tol * out.values(0);
  out.retained = 0;
  while (out.retained < m && out.values(out.retained) > cutoff) ++out.retained;
  return out;
}

void require_finite(const Eigen::MatrixXd& m, const char* name) {
  if (!m.allFinite())
    throw EstimationError(std::string(name) + " contains non-finite entries");
}

// Flip v so its largest-magnitude entry is positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

}  // namespace

SampleMoments sample_moments(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                             bool center, double rank_tol) {
  if (x.cols() != y.cols())
    throw EstimationError("x and y must have the same number of samples (" +
                          std::to_string(x.cols()) + " vs " +
                          std::to_string(y.cols()) + ")");
  if (x.rows() != y.rows())
    throw EstimationError("x and y must have the same dimension (" +
                          std::to_string(x.rows()) + " vs " +
                          std::to_string(y.rows()) + ")");
  if (x.cols() < 2) throw EstimationError("need at least 2 samples");
  if (x.rows() < 1 || y.rows() < 1) throw EstimationError("empty data block");
  if (!(rank_tol >= 0.0 && rank_tol < 1.0))
    throw EstimationError("rank_tol must lie in [0, 1)");
  require_finite(x, "x");
  require_finite(y, "y");

  SampleMoments m;
  m.n = static_cast<long>(x.cols());
  m.centered = center;
  if (center) {
    const Eigen::MatrixXd xc = x.colwise() - x.rowwise().mean();
    const Eigen::MatrixXd yc = y.colwise() - y.rowwise().mean();
    m.x = block_spectrum(xc, true, rank_tol, "x");
    m.y = block_spectrum(yc, true, rank_tol, "y");
  } else {
    m.x = block_spectrum(x, false, rank_tol, "x");
    m.y = block_spectrum(y, false, rank_tol, "y");
  }
  m.rank = std::min(m.x.retained, m.y.retained);

  // Xi_X^T (X Y^T / n) Xi_Y = S_X V_X^T V_Y S_Y / n on the retained block.
  const Eigen::Index r = m.rank;
  const double n = static_cast<double>(m.n);
  const Eigen::MatrixXd overlap =
      m.x.scores.leftCols(r).transpose() * m.y.scores.leftCols(r);
  const Eigen::VectorXd sx = (m.x.values.head(r) * n).cwiseSqrt();
  const Eigen::VectorXd sy = (m.y.values.head(r) * n).cwiseSqrt();
  m.sxy_core = sx.asDiagonal() * overlap * sy.asDiagonal() / n;
  return m;
}

Eigen::MatrixXd whitened_correlation_core(const SampleMoments& m) {
  const Eigen::VectorXd wx = m.sxx_vals().cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd wy = m.syy_vals().cwiseSqrt().cwiseInverse();
  return wx.asDiagonal() * m.sxy_core * wy.asDiagonal();
}

Eigen::VectorXd cross_covariance_singular_values(const SampleMoments& m) {
  const double n = static_cast<double>(m.n);
  const Eigen::VectorXd sx = (m.x.values * n).cwiseSqrt();
  const Eigen::VectorXd sy = (m.y.values * n).cwiseSqrt();
  const Eigen::MatrixXd middle =
      sx.asDiagonal() * (m.x.scores.transpose() * m.y.scores) * sy.asDiagonal() / n;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(middle);
  return svd.singularValues();
}

CcaEstimate cca_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    const CcaOptions& options) {
  return cca_from_moments(sample_moments(x, y, options.center, options.rank_tol),
                          options.k);
}

CcaEstimate cca_from_moments(const SampleMoments& m, Eigen::Index requested) {
  const Eigen::Index r = m.rank;
  const Eigen::Index available = std::min(m.x.basis.cols(), m.y.basis.cols());
  const Eigen::Index k = requested == 0 ? r : requested;
  if (k < 0 || k > available)
    throw EstimationError("insufficient rank: requested " + std::to_string(k) +
                          " components but the data span only " +
                          std::to_string(available) + " directions");

  const Eigen::MatrixXd core = whitened_correlation_core(m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(core, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd rho = svd.singularValues().cwiseMax(0.0).cwiseMin(1.0);

  std::vector<Eigen::Index> order(r);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return rho(a) > rho(b); });

  const Eigen::VectorXd wx = m.sxx_vals().cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd wy = m.syy_vals().cwiseSqrt().cwiseInverse();

  CcaEstimate est;
  est.rho_hat = Eigen::VectorXd::Zero(k);
  est.psi_x_hat.resize(m.x.basis.rows(), k);
  est.psi_y_hat.resize(m.y.basis.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (i < r) {
      const Eigen::Index j = order[i];
      est.rho_hat(i) = rho(j);
      est.psi_x_hat.col(i) = m.sxx_basis() * (wx.asDiagonal() * svd.matrixU().col(j));
      est.psi_y_hat.col(i) = m.syy_basis() * (wy.asDiagonal() * svd.matrixV().col(j));
      est.psi_x_hat.col(i).normalize();
      est.psi_y_hat.col(i).normalize();
    } else {
      // The whitened operator vanishes here; report the next sample
      // eigendirections with zero correlation.
      est.psi_x_hat.col(i) = m.x.basis.col(i);
      est.psi_y_hat.col(i) = m.y.basis.col(i);
    }
    fix_sign(est.psi_x_hat.col(i));
    fix_sign(est.psi_y_hat.col(i));
  }

  CcaDiagnostics& diag = est.diagnostics;
  diag.rank_x = m.x.retained;
  diag.rank_y = m.y.retained;
  diag.rank = r;
  diag.padded = std::max<Eigen::Index>(0, k - r);
  if (r > 0) {
    diag.min_retained_ratio = std::min(m.x.values(r - 1) / m.x.values(0),
                                       m.y.values(r - 1) / m.y.values(0));
  }
  return est;
}

Alignment alignment(const Eigen::Ref<const Eigen::VectorXd>& v,
                    const Eigen::Ref<const Eigen::VectorXd>& w) {
  if (v.size() != w.size())
    throw std::invalid_argument("alignment: vectors differ in length");
  for (const double norm : {v.norm(), w.norm()}) {
    if (!(std::abs(norm - 1.0) <= 1e-8))
      throw std::invalid_argument("alignment: input is not a unit vector (norm " +
                                  std::to_string(norm) + ")");
  }
  Alignment a;
  a.inner = v.dot(w);
  a.abs_inner = std::abs(a.inner);
  a.angle_deg = std::acos(std::clamp(a.abs_inner, 0.0, 1.0)) * 180.0 / std::numbers::pi;
  return a;
}

}  // namespace hdcca
