#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <vector>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hdcca/estimator.hpp"
#include "hdcca/sampling.hpp"
#include "oracles.hpp"

using namespace hdcca;
using hdcca::test::random_normal;
using hdcca::test::sign_free_distance;

namespace {

DataSet reference_draw(double alpha, long d, long n, std::uint32_t rep) {
  SpikedParams p;
  p.alpha = alpha;
  p.rho = 0.7;
  p.theta_x = p.theta_y = 0.75 * std::numbers::pi;
  p.d = d;
  const PopulationModel m = build_population_model(p);
  return generate_dataset(m, joint_sqrt(m), n, replication_stream(4242, 0, rep));
}

using Big = boost::multiprecision::cpp_bin_float_50;

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
std::vector<Big> jacobi_eigenvalues(std::vector<std::vector<Big>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 60; ++sweep) {
    Big off = 0, diag = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) (i == j ? diag : off) += a[i][j] * a[i][j];
    if (off <= diag * Big("1e-90")) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0) continue;
        const Big theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const Big t = (theta >= 0 ? 1 : -1) / (abs(theta) + sqrt(theta * theta + 1));
        const Big c = 1 / sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const Big akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Big apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<Big> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i][i];
  std::sort(values.begin(), values.end(), [](const Big& l, const Big& r) { return l > r; });
  return values;
}

}  // namespace

TEST_CASE("identical blocks give equal spectra and a PSD cross core") {
  std::mt19937_64 gen(1);
  const Eigen::MatrixXd x = random_normal(30, 12, gen);
  const SampleMoments m = sample_moments(x, x);
  CHECK(m.x.values == m.y.values);
  CHECK((m.sxy_core - m.sxy_core.transpose()).norm() < 1e-12 * m.sxy_core.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.sxy_core);
  CHECK(es.eigenvalues().minCoeff() > -1e-12 * es.eigenvalues().maxCoeff());

  const Eigen::MatrixXd k = whitened_correlation_core(m);
  CHECK((k - Eigen::MatrixXd::Identity(m.rank, m.rank)).norm() < 1e-10);
}

TEST_CASE("moments match a dense eigendecomposition when d < n") {
  std::mt19937_64 gen(2);
  const Eigen::MatrixXd x = random_normal(3, 100, gen);
  const Eigen::MatrixXd y = random_normal(3, 100, gen);
  const SampleMoments m = sample_moments(x, y);
  const auto dense = test::dense_covariance_spectrum(x);
  REQUIRE(m.x.values.size() == 3);
  CHECK((m.x.values - dense.values).cwiseAbs().maxCoeff() < 1e-10 * dense.values(0));
  CHECK((m.x.basis.transpose() * m.x.basis - Eigen::Matrix3d::Identity()).norm() < 1e-10);
}

TEST_CASE("sample moments satisfy their invariants") {
  std::mt19937_64 gen(3);
  for (bool center : {false, true}) {
    const Eigen::MatrixXd x = random_normal(40, 15, gen);
    const Eigen::MatrixXd y = random_normal(40, 15, gen);
    const SampleMoments m = sample_moments(x, y, center);
    CHECK(m.centered == center);
    CHECK(m.rank <= (center ? 14 : 15));
    CHECK(m.x.basis.cols() == (center ? 14 : 15));
    for (Eigen::Index i = 1; i < m.x.values.size(); ++i) CHECK(m.x.values(i) <= m.x.values(i - 1));
    CHECK(m.x.values.minCoeff() >= 0.0);
    const Eigen::MatrixXd b = m.sxx_basis();
    CHECK((b.transpose() * b - Eigen::MatrixXd::Identity(m.rank, m.rank)).norm() < 1e-10);
  }
}

TEST_CASE("n-dimensional path agrees with the dense d x d eigendecomposition") {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<long> dim(2, 20), samples(2, 50);
  for (int trial = 0; trial < 60; ++trial) {
    const long d = dim(gen), n = samples(gen);
    const Eigen::MatrixXd x = random_normal(d, n, gen);
    const SampleMoments m = sample_moments(x, random_normal(d, n, gen), false, 0.0);
    const auto dense = test::dense_covariance_spectrum(x);
    const long r = std::min(d, n);
    REQUIRE(m.x.values.size() == r);
    CHECK((m.x.values - dense.values.head(r)).cwiseAbs().maxCoeff() <= 1e-10 * dense.values(0));
    for (long i = 0; i < r; ++i) {
      // Eigenvectors are only determined when their eigenvalue is isolated.
      double gap = std::numeric_limits<double>::infinity();
      if (i > 0) gap = std::min(gap, dense.values(i - 1) - dense.values(i));
      if (i + 1 < d) gap = std::min(gap, dense.values(i) - dense.values(i + 1));
      if (gap < 1e-3 * dense.values(0)) continue;
      CHECK(sign_free_distance(m.x.basis.col(i), dense.vectors.col(i)) < 1e-8);
    }
  }
}

TEST_CASE("spiked data keeps small eigenvalues accurate to their own size") {
  // At alpha = 8 one row of X is ~1e10 times the others. Compare against the
  // Gram matrix eigenvalues computed in 50-digit arithmetic.
  const DataSet data = reference_draw(8.0, 200, 20, 0);
  const SampleMoments m = sample_moments(data.x, data.y, false, 0.0);

  const long n = 20;
  std::vector<std::vector<Big>> gram(n, std::vector<Big>(n));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j <= i; ++j) {
      Big acc = 0;
      for (long r = 0; r < data.x.rows(); ++r) acc += Big(data.x(r, i)) * Big(data.x(r, j));
      gram[i][j] = gram[j][i] = acc / n;
    }
  const std::vector<Big> exact = jacobi_eigenvalues(gram);
  for (long i = 0; i < n; ++i) {
    const double e = static_cast<double>(exact[i]);
    CHECK(std::abs(m.x.values(i) - e) <= 1e-8 * e);
  }
}

TEST_CASE("whitened core matches the dense pseudoinverse operator") {
  std::mt19937_64 gen(5);
  const Eigen::MatrixXd x = random_normal(4, 200, gen);
  Eigen::MatrixXd y = random_normal(4, 200, gen);
  y += 0.5 * x;
  const SampleMoments m = sample_moments(x, y);
  const Eigen::MatrixXd dense = test::dense_whitened_operator(x, y, kDefaultRankTol);
  const Eigen::MatrixXd restricted = m.sxx_basis().transpose() * dense * m.syy_basis();
  CHECK((whitened_correlation_core(m) - restricted).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("independent blocks with n < d give an orthogonal core") {
  std::mt19937_64 gen(6);
  const Eigen::MatrixXd x = random_normal(100, 20, gen);
  const Eigen::MatrixXd y = random_normal(100, 20, gen);
  const Eigen::MatrixXd k = whitened_correlation_core(sample_moments(x, y));
  REQUIRE(k.rows() == 20);
  CHECK((k.transpose() * k - Eigen::MatrixXd::Identity(20, 20)).norm() < 1e-8);

  const CcaEstimate est = cca_fit(x, y);
  CHECK(est.components() == 20);
  CHECK((est.rho_hat.array() - 1.0).abs().maxCoeff() < 1e-8);
}

TEST_CASE("identical blocks give unit correlations and equal weights") {
  std::mt19937_64 gen(7);
  const Eigen::MatrixXd x = random_normal(6, 80, gen);
  const CcaEstimate est = cca_fit(x, x);
  CHECK(est.components() == 6);
  CHECK((est.rho_hat.array() - 1.0).abs().maxCoeff() < 1e-10);
  for (Eigen::Index i = 0; i < 6; ++i)
    CHECK(sign_free_distance(est.psi_x_hat.col(i), est.psi_y_hat.col(i)) < 1e-10);
}

TEST_CASE("agrees with classical generalized-eigenproblem CCA when n >> d") {
  std::mt19937_64 gen(8);
  const Eigen::MatrixXd latent = random_normal(2, 500, gen);
  Eigen::MatrixXd x = random_normal(5, 500, gen);
  Eigen::MatrixXd y = random_normal(5, 500, gen);
  x.topRows(2) += 1.5 * latent;
  y.row(0) += latent.row(0);
  y.row(3) += 0.5 * latent.row(1);
  const CcaEstimate est = cca_fit(x, y);
  const auto ref = test::dense_classical_cca(x, y);
  REQUIRE(est.components() == 5);
  CHECK((est.rho_hat - ref.rho).cwiseAbs().maxCoeff() < 1e-8);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(sign_free_distance(est.psi_x_hat.col(i), ref.wx.col(i)) < 1e-6);
    CHECK(sign_free_distance(est.psi_y_hat.col(i), ref.wy.col(i)) < 1e-6);
  }
}

TEST_CASE("estimate invariants and sign convention") {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd x = random_normal(12, 30, gen);
    const Eigen::MatrixXd y = random_normal(12, 30, gen) + 0.3 * x;
    const CcaEstimate est = cca_fit(x, y, {.center = trial % 2 == 1});
    for (Eigen::Index i = 0; i < est.components(); ++i) {
      CHECK(est.rho_hat(i) >= 0.0);
      CHECK(est.rho_hat(i) <= 1.0);
      if (i > 0) CHECK(est.rho_hat(i) <= est.rho_hat(i - 1));
      CHECK(std::abs(est.psi_x_hat.col(i).norm() - 1.0) < 1e-10);
      Eigen::Index arg = 0;
      est.psi_x_hat.col(i).cwiseAbs().maxCoeff(&arg);
      CHECK(est.psi_x_hat(arg, i) > 0.0);
    }
  }
}

TEST_CASE("rescaling either block leaves the fit unchanged") {
  std::mt19937_64 gen(10);
  for (long n : {15L, 200L}) {
    const Eigen::MatrixXd x = random_normal(8, n, gen);
    const Eigen::MatrixXd y = random_normal(8, n, gen) + 0.5 * x;
    const CcaEstimate a = cca_fit(x, y, {.k = 5});
    const CcaEstimate b = cca_fit(1e3 * x, 2.5e-4 * y, {.k = 5});
    CHECK((a.rho_hat - b.rho_hat).cwiseAbs().maxCoeff() < 1e-10);
    for (Eigen::Index i = 0; i < 5; ++i) {
      if (n == 15) continue;  // n < d ties all correlations at 1; directions are not unique
      CHECK(sign_free_distance(a.psi_x_hat.col(i), b.psi_x_hat.col(i)) < 1e-8);
      CHECK(sign_free_distance(a.psi_y_hat.col(i), b.psi_y_hat.col(i)) < 1e-8);
    }
  }
}

TEST_CASE("weak spike: every correlation is essentially one") {
  const DataSet data = reference_draw(0.2, 500, 20, 1);
  const CcaEstimate est = cca_fit(data.x, data.y, {.k = 5});
  CHECK(est.diagnostics.rank == 20);
  CHECK(est.rho_hat.minCoeff() > 0.99);
}

TEST_CASE("strong spike: rank collapses to the spike and padding is reported") {
  const DataSet data = reference_draw(8.0, 500, 20, 2);
  const CcaEstimate est = cca_fit(data.x, data.y, {.k = 5});
  CHECK(est.diagnostics.rank == 1);
  CHECK(est.diagnostics.padded == 4);
  CHECK(est.rho_hat.tail(4).isZero(0.0));
  // Padded weights are the next sample eigenvectors: orthonormal and
  // orthogonal to the first weight.
  const Eigen::MatrixXd g = est.psi_x_hat.transpose() * est.psi_x_hat;
  CHECK((g - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-10);
}

TEST_CASE("first eigenvalue of spiked data scales like chi-square") {
  // lambda_1 n / d^alpha ~ chi2_n, whose mean is n.
  const long n = 20, d = 500;
  double sum = 0.0;
  for (std::uint32_t rep = 0; rep < 100; ++rep) {
    const DataSet data = reference_draw(8.0, d, n, 100 + rep);
    const SampleMoments m = sample_moments(data.x, data.y);
    sum += m.x.values(0) * n / std::pow(double(d), 8.0);
  }
  CHECK(sum / 100.0 == doctest::Approx(20.0).epsilon(0.15));
}

TEST_CASE("estimator errors") {
  std::mt19937_64 gen(11);
  const Eigen::MatrixXd x = random_normal(5, 10, gen);
  CHECK_THROWS_AS(sample_moments(x, random_normal(5, 9, gen)), EstimationError);
  CHECK_THROWS_AS(sample_moments(x, random_normal(4, 10, gen)), EstimationError);
  CHECK_THROWS_AS(sample_moments(x.leftCols(1), x.leftCols(1)), EstimationError);
  CHECK_THROWS_WITH_AS(sample_moments(Eigen::MatrixXd::Zero(5, 10), x),
                       doctest::Contains("degenerate data"), EstimationError);
  Eigen::MatrixXd bad = x;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(cca_fit(bad, x), EstimationError);
  CHECK_THROWS_WITH_AS(cca_fit(x, x, {.k = 6}), doctest::Contains("insufficient rank"),
                       EstimationError);
  CHECK_THROWS_AS(cca_fit(x, x, {.center = true, .k = 10}), EstimationError);
  CHECK_NOTHROW(cca_fit(x, x, {.center = true, .k = 5}));
}

TEST_CASE("alignment") {
  Eigen::VectorXd v(3), w(3);
  v << 1, 0, 0;
  w << 0, 1, 0;
  const Alignment same = alignment(v, v);
  CHECK(same.inner == 1.0);
  CHECK(same.abs_inner == 1.0);
  CHECK(same.angle_deg == 0.0);
  const Alignment perp = alignment(v, w);
  CHECK(perp.inner == 0.0);
  CHECK(perp.angle_deg == doctest::Approx(90.0));
  const Alignment flipped = alignment(v, -v);
  CHECK(flipped.inner == -1.0);
  CHECK(flipped.abs_inner == 1.0);
  CHECK(flipped.angle_deg == 0.0);
  CHECK_THROWS_AS(alignment(v, 2.0 * w), std::invalid_argument);
}
