#include "melm/linalg.hpp"

#include <cmath>
#include <string>

#include "melm/error.hpp"

namespace melm {

Eigen::LLT<Eigen::MatrixXd> spd_cholesky_inplace(Eigen::MatrixXd& m,
                                                 const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-10 * m.trace() / static_cast<double>(m.rows());
  if (jitter > 0.0 && std::isfinite(jitter)) {
    m.diagonal().array() += jitter;
    llt.compute(m);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw SingularMatrixError(std::string(what) +
                            " is not positive definite, even after diagonal jitter");
}

Eigen::LLT<Eigen::MatrixXd> spd_cholesky(const Eigen::MatrixXd& m,
                                         const char* what) {
  Eigen::MatrixXd copy = m;
  return spd_cholesky_inplace(copy, what);
}

double logdet_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace melm
