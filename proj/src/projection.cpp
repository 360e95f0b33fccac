#include "melm/projection.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <utility>

#include "melm/error.hpp"

namespace melm {

ProjectionMatrix::ProjectionMatrix(Eigen::MatrixXd m) : v(std::move(m)) {
  validate(v);
}

void ProjectionMatrix::validate(const Eigen::MatrixXd& m) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw ValidationError("projection matrix must have at least one row and column");
  }
  if (m.cols() > m.rows()) {
    throw ValidationError("projection matrix has more columns than rows (k > d)");
  }
  if (!m.allFinite()) {
    throw ValidationError("projection matrix has non-finite entries");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-8 * sv(0))) {
    throw ValidationError("projection matrix columns are (nearly) linearly dependent");
  }
}

ProjectionMatrix orthonormalized(const Eigen::MatrixXd& v) {
  ProjectionMatrix::validate(v);
  const Eigen::Index k = v.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(v.rows(), k);
  // Fix the sign ambiguity of QR so the map v -> q is deterministic: make the
  // R diagonal positive.
  for (Eigen::Index j = 0; j < k; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return ProjectionMatrix(std::move(q));
}

}  // namespace melm
