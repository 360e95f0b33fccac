#pragma once

#include <Eigen/Dense>

namespace melm {

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

/// Cholesky factorization of a symmetric positive-definite matrix. If the
/// plain factorization fails, one jitter of 1e-10 * tr(m)/k is added to the
/// diagonal and the factorization retried; throws SingularMatrixError if it
/// still fails. `what` names the matrix in the error message.
Eigen::LLT<Eigen::MatrixXd> spd_cholesky(const Eigen::MatrixXd& m,
                                         const char* what);

/// Same contract as spd_cholesky, but applies the jitter to `m` itself so the
/// caller keeps the matrix that was actually factored.
Eigen::LLT<Eigen::MatrixXd> spd_cholesky_inplace(Eigen::MatrixXd& m,
                                                 const char* what);

/// log det from a successful Cholesky factorization.
double logdet_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt);

}  // namespace melm
