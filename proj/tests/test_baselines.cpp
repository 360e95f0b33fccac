#include <cmath>
#include <numbers>

#include "doctest.h"
#include "melm/baselines.hpp"
#include "melm/density.hpp"
#include "melm/error.hpp"
#include "melm/optimizer.hpp"
#include "melm/rng.hpp"
#include "oracle.hpp"

namespace {

/// Anisotropic Gaussian cloud with per-coordinate standard deviations.
Eigen::MatrixXd scaled_cloud(const Eigen::VectorXd& sd, int n, melm::Rng& rng) {
  Eigen::MatrixXd points(sd.size(), n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < sd.size(); ++i) points(i, j) = sd(i) * rng.normal();
  }
  return points;
}

}  // namespace

TEST_CASE("symmetric eigendecomposition: order, signs, reconstruction") {
  melm::Rng rng(3);
  const Eigen::MatrixXd m = oracle::random_spd(5, rng);
  const auto eig = melm::symmetric_eigen_sorted(m);

  for (int i = 1; i < 5; ++i) CHECK(eig.values(i - 1) >= eig.values(i));
  CHECK((eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose() - m)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK((eig.vectors.transpose() * eig.vectors -
         Eigen::MatrixXd::Identity(5, 5))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  for (int j = 0; j < 5; ++j) {
    Eigen::Index at = 0;
    eig.vectors.col(j).cwiseAbs().maxCoeff(&at);
    CHECK(eig.vectors(at, j) > 0.0);
  }

  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(melm::symmetric_eigen_sorted(rect), melm::ValidationError);
}

TEST_CASE("eigendecomposition against a hand-solved 2x2") {
  // [[2, 1], [1, 2]] has eigenpairs (3, [1,1]/sqrt2), (1, [1,-1]/sqrt2).
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const auto eig = melm::symmetric_eigen_sorted(m);
  CHECK(eig.values(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(eig.values(1) == doctest::Approx(1.0).epsilon(1e-14));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(eig.vectors(0, 0) == doctest::Approx(r));
  CHECK(eig.vectors(1, 0) == doctest::Approx(r));
  // Sign convention: first max-magnitude entry is positive.
  CHECK(eig.vectors(0, 1) == doctest::Approx(r));
  CHECK(eig.vectors(1, 1) == doctest::Approx(-r));
}

TEST_CASE("pca recovers the dominant axes of an anisotropic cloud") {
  melm::Rng rng(17);
  Eigen::VectorXd sd(4);
  sd << 5.0, 3.0, 0.5, 0.1;
  const auto points = scaled_cloud(sd, 4000, rng);

  const auto v = melm::pca(points, 2);
  Eigen::MatrixXd axes = Eigen::MatrixXd::Zero(4, 2);
  axes(0, 0) = 1.0;
  axes(1, 1) = 1.0;
  CHECK(oracle::subspace_gap(v.v, axes) < 0.05);
  CHECK((v.gram() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-12);

  bool degenerate = true;
  melm::pca(points, 2, &degenerate);
  CHECK_FALSE(degenerate);

  // An isotropic covariance ties every eigenvalue.
  Eigen::MatrixXd iso(2, 4);
  iso << 1.0, -1.0, 0.0, 0.0,
         0.0, 0.0, 1.0, -1.0;
  melm::pca(iso, 1, &degenerate);
  CHECK(degenerate);

  CHECK_THROWS_AS(melm::pca(points, 0), melm::ConfigError);
  CHECK_THROWS_AS(melm::pca(points, 5), melm::ConfigError);
}

TEST_CASE("class pca sums covariances; weighting matters for unequal sizes") {
  melm::Rng rng(23);
  Eigen::VectorXd sd_plus(3), sd_minus(3);
  sd_plus << 4.0, 1.0, 0.2;   // large class variance along x
  sd_minus << 0.2, 1.0, 4.0;  // large class variance along z
  const auto x_plus = scaled_cloud(sd_plus, 300, rng);
  const auto x_minus = scaled_cloud(sd_minus, 300, rng);

  // Equal sizes: weighted and unweighted spans coincide.
  const auto unweighted = melm::class_pca(x_plus, x_minus, 2, false);
  const auto weighted = melm::class_pca(x_plus, x_minus, 2, true);
  CHECK(oracle::subspace_gap(unweighted.v, weighted.v) < 1e-10);

  // The sum of the two covariances is dominated by x and z, not y.
  Eigen::MatrixXd xz = Eigen::MatrixXd::Zero(3, 2);
  xz(0, 0) = 1.0;
  xz(2, 1) = 1.0;
  CHECK(oracle::subspace_gap(unweighted.v, xz) < 0.05);

  // Unequal sizes: weighting a 10-sample x-heavy class down against a
  // 300-sample z-heavy class changes the top direction.
  const auto x_small = scaled_cloud(sd_plus, 10, rng);
  const auto w = melm::class_pca(x_small, x_minus, 1, true);
  const auto u = melm::class_pca(x_small, x_minus, 1, false);
  CHECK(std::abs(w.v.col(0)(2)) > 0.9);  // weighted: z wins
  CHECK(oracle::subspace_gap(w.v, u.v) > 0.1);

  Eigen::MatrixXd one(3, 1);
  one.setZero();
  CHECK_THROWS_AS(melm::class_pca(one, x_minus, 1, false),
                  melm::ValidationError);
}

TEST_CASE("per-class pca stacks the two first principal directions") {
  melm::Rng rng(29);
  Eigen::VectorXd sd_plus(3), sd_minus(3);
  sd_plus << 3.0, 0.3, 0.3;
  sd_minus << 0.3, 3.0, 0.3;
  const auto x_plus = scaled_cloud(sd_plus, 500, rng);
  const auto x_minus = scaled_cloud(sd_minus, 500, rng);

  bool fallback = true;
  const auto v = melm::per_class_pca(x_plus, x_minus, &fallback);
  CHECK_FALSE(fallback);
  CHECK(v.k() == 2);
  // Column 0 is the minus-class direction (y), column 1 the plus-class (x).
  CHECK(std::abs(v.v.col(0)(1)) > 0.99);
  CHECK(std::abs(v.v.col(1)(0)) > 0.99);

  // Identical classes: collinear directions force the pooled-pc2 fallback,
  // and the result must still have independent columns.
  const auto w = melm::per_class_pca(x_plus, x_plus, &fallback);
  CHECK(fallback);
  CHECK(std::abs(w.v.col(0).normalized().dot(w.v.col(1).normalized())) < 0.99);
}

TEST_CASE("gaussian mle entropy: closed form and pca extremality") {
  melm::Rng rng(31);
  Eigen::VectorXd sd(4);
  sd << 3.0, 2.0, 1.0, 0.4;
  const auto points = scaled_cloud(sd, 2000, rng);

  // Closed form against an explicit determinant.
  const auto v = melm::random_orthonormal(4, 2, 11);
  const Eigen::MatrixXd s = v.v.transpose() * melm::covariance(points) * v.v;
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  CHECK(melm::gaussian_mle_entropy(points, v) ==
        doctest::Approx(std::log(4.0 * std::numbers::pi) + 0.5 * std::log(det))
            .epsilon(1e-12));

  // The top-k principal subspace maximizes the entropy, the bottom-k
  // subspace minimizes it, over random competitors.
  const auto top = melm::pca(points, 2);
  const auto eig = melm::symmetric_eigen_sorted(melm::covariance(points));
  const melm::ProjectionMatrix bottom(eig.vectors.rightCols(2));
  const double top_H = melm::gaussian_mle_entropy(points, top);
  const double bottom_H = melm::gaussian_mle_entropy(points, bottom);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = melm::random_orthonormal(4, 2, 100 + trial);
    const double h = melm::gaussian_mle_entropy(points, r);
    CHECK(h <= top_H + 1e-9);
    CHECK(h >= bottom_H - 1e-9);
  }
}

TEST_CASE("identity projection slices the identity") {
  const auto v = melm::identity_projection(4, 2);
  CHECK(v.d() == 4);
  CHECK(v.k() == 2);
  CHECK(v.v(0, 0) == 1.0);
  CHECK(v.v(1, 1) == 1.0);
  CHECK(v.v.cwiseAbs().sum() == 2.0);
  CHECK_THROWS_AS(melm::identity_projection(2, 3), melm::ConfigError);
}
