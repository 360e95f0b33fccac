#include "melm/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "melm/density.hpp"
#include "melm/error.hpp"
#include "melm/linalg.hpp"

namespace melm {

namespace {

/// Makes each column's largest-magnitude entry positive; ties go to the
/// first index attaining the maximum, so the convention is deterministic.
void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index at = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&at);
    if (vectors(at, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }
}

void check_k(Eigen::Index d, int k) {
  if (k < 1 || k > d) {
    throw ConfigError("target dimension k must satisfy 1 <= k <= d (d = " +
                      std::to_string(d) + ", k = " + std::to_string(k) + ")");
  }
}

}  // namespace

EigenDecomposition symmetric_eigen_sorted(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw ValidationError("eigendecomposition needs a square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized(m));
  if (solver.info() != Eigen::Success) {
    throw SingularMatrixError("symmetric eigendecomposition failed to converge");
  }
  const auto d = m.rows();
  EigenDecomposition out;
  out.values.resize(d);
  out.vectors.resize(d, d);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values(i) = solver.eigenvalues()(d - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  fix_signs(out.vectors);
  return out;
}

ProjectionMatrix pca(const Eigen::MatrixXd& points, int k,
                     bool* degenerate_spectrum) {
  check_k(points.rows(), k);
  const auto eig = symmetric_eigen_sorted(covariance(points));
  if (degenerate_spectrum != nullptr) {
    *degenerate_spectrum =
        k < points.rows() &&
        eig.values(k - 1) - eig.values(k) <= 1e-12 * std::max(eig.values(0), 0.0);
  }
  return ProjectionMatrix(eig.vectors.leftCols(k));
}

ProjectionMatrix class_pca(const Eigen::MatrixXd& x_plus,
                           const Eigen::MatrixXd& x_minus, int k,
                           bool weighted) {
  if (x_plus.rows() != x_minus.rows()) {
    throw ValidationError("the two classes have different dimensions");
  }
  check_k(x_plus.rows(), k);
  if (x_plus.cols() < 2 || x_minus.cols() < 2) {
    throw ValidationError("each class needs at least 2 samples");
  }
  const double n_plus = static_cast<double>(x_plus.cols());
  const double n_minus = static_cast<double>(x_minus.cols());
  Eigen::MatrixXd combined;
  if (weighted) {
    const double total = n_plus + n_minus;
    combined = (n_minus / total) * covariance(x_minus) +
               (n_plus / total) * covariance(x_plus);
  } else {
    combined = covariance(x_minus) + covariance(x_plus);
  }
  const auto eig = symmetric_eigen_sorted(combined);
  return ProjectionMatrix(eig.vectors.leftCols(k));
}

ProjectionMatrix per_class_pca(const Eigen::MatrixXd& x_plus,
                               const Eigen::MatrixXd& x_minus,
                               bool* collinear_fallback) {
  if (x_plus.rows() != x_minus.rows()) {
    throw ValidationError("the two classes have different dimensions");
  }
  const auto d = x_plus.rows();
  if (d < 2) {
    throw ValidationError("per-class projection needs at least 2 features");
  }
  if (x_plus.cols() < 2 || x_minus.cols() < 2) {
    throw ValidationError("each class needs at least 2 samples");
  }

  const auto eig_minus = symmetric_eigen_sorted(covariance(x_minus));
  const auto eig_plus = symmetric_eigen_sorted(covariance(x_plus));
  if (!(eig_minus.values(0) > 0.0) || !(eig_plus.values(0) > 0.0)) {
    throw SingularMatrixError("a class covariance is degenerate (no principal "
                              "direction)");
  }

  Eigen::MatrixXd v(d, 2);
  v.col(0) = eig_minus.vectors.col(0);
  v.col(1) = eig_plus.vectors.col(0);
  bool fallback = false;
  // Directions are collinear when the angle between their lines vanishes;
  // |cos| is compared against cos(1e-6 rad) ~ 1 - 5e-13.
  const double cosine = std::abs(v.col(0).dot(v.col(1)));
  if (std::acos(std::clamp(cosine, 0.0, 1.0)) < 1e-6) {
    Eigen::MatrixXd pooled(d, x_plus.cols() + x_minus.cols());
    pooled << x_minus, x_plus;
    const auto eig_pooled = symmetric_eigen_sorted(covariance(pooled));
    v.col(1) = eig_pooled.vectors.col(1);
    fallback = true;
  }
  if (collinear_fallback != nullptr) *collinear_fallback = fallback;
  return ProjectionMatrix(std::move(v));
}

double gaussian_mle_entropy(const Eigen::MatrixXd& points,
                            const ProjectionMatrix& v) {
  if (points.rows() != v.d()) {
    throw ValidationError("data dimension does not match the projection");
  }
  const Eigen::MatrixXd projected =
      symmetrized(v.v.transpose() * covariance(points) * v.v);
  Eigen::LLT<Eigen::MatrixXd> llt(projected);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("projected covariance is singular");
  }
  return 0.5 * static_cast<double>(v.k()) * std::log(4.0 * std::numbers::pi) +
         0.5 * logdet_from_llt(llt);
}

ProjectionMatrix identity_projection(int d, int k) {
  check_k(d, k);
  return ProjectionMatrix(Eigen::MatrixXd::Identity(d, k));
}

}  // namespace melm
