#pragma once

#include <Eigen/Dense>

namespace melm {

/// A d x k matrix of linearly independent columns spanning the projection
/// subspace. Construction validates finiteness and independence (smallest
/// singular value > 1e-8 * largest).
struct ProjectionMatrix {
  Eigen::MatrixXd v;

  ProjectionMatrix() = default;
  explicit ProjectionMatrix(Eigen::MatrixXd m);

  int d() const { return static_cast<int>(v.rows()); }
  int k() const { return static_cast<int>(v.cols()); }

  /// V^T V.
  Eigen::MatrixXd gram() const { return v.transpose() * v; }

  /// Throws ValidationError when `m` has non-finite entries or dependent
  /// columns.
  static void validate(const Eigen::MatrixXd& m);
};

/// Column-orthonormalization (thin QR with positive diagonal) preserving the
/// spanned subspace.
ProjectionMatrix orthonormalized(const Eigen::MatrixXd& v);

}  // namespace melm
