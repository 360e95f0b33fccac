#include "melm/objective.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "melm/cross_ip.hpp"
#include "melm/error.hpp"

namespace melm {

namespace {

void check_projection(const ProjectionMatrix& v, int d, int k) {
  if (v.d() != d || v.k() != k) {
    throw ValidationError("projection shape " + std::to_string(v.d()) + "x" +
                          std::to_string(v.k()) + " does not match the bound " +
                          "objective (" + std::to_string(d) + "x" +
                          std::to_string(k) + ")");
  }
}

}  // namespace

ObjectiveWorkspace::ObjectiveWorkspace(Eigen::MatrixXd x_plus,
                                       Eigen::MatrixXd x_minus, int k,
                                       const BandwidthConfig& cfg)
    : x_plus_(std::move(x_plus)),
      x_minus_(std::move(x_minus)),
      k_(k),
      cfg_(cfg) {
  if (x_plus_.rows() != x_minus_.rows()) {
    throw ValidationError("the two classes have different dimensions");
  }
  if (x_plus_.cols() < 2 || x_minus_.cols() < 2) {
    throw ValidationError("each class needs at least 2 samples");
  }
  if (k_ < 1 || k_ > x_plus_.rows()) {
    throw ConfigError("target dimension k must satisfy 1 <= k <= d");
  }
  if (!x_plus_.allFinite() || !x_minus_.allFinite()) {
    throw ValidationError("class data has non-finite entries");
  }
  sigma_pp_ = pooled_bandwidth_cov(x_plus_, x_plus_, k_, cfg_).sigma_ab;
  sigma_mm_ = pooled_bandwidth_cov(x_minus_, x_minus_, k_, cfg_).sigma_ab;
  sigma_pm_ = pooled_bandwidth_cov(x_plus_, x_minus_, k_, cfg_).sigma_ab;
}

double ObjectiveWorkspace::dcs(const ProjectionMatrix& v) const {
  check_projection(v, d(), k_);
  const double lpp = cross_ip(x_plus_, x_plus_, sigma_pp_, v.v, false).log_ip;
  const double lmm = cross_ip(x_minus_, x_minus_, sigma_mm_, v.v, false).log_ip;
  const double lpm = cross_ip(x_plus_, x_minus_, sigma_pm_, v.v, false).log_ip;
  return lpp + lmm - 2.0 * lpm;
}

Eigen::MatrixXd ObjectiveWorkspace::dcs_gradient(const ProjectionMatrix& v) const {
  check_projection(v, d(), k_);
  const auto tpp = cross_ip(x_plus_, x_plus_, sigma_pp_, v.v, true);
  const auto tmm = cross_ip(x_minus_, x_minus_, sigma_mm_, v.v, true);
  const auto tpm = cross_ip(x_plus_, x_minus_, sigma_pm_, v.v, true);
  return tpp.grad + tmm.grad - 2.0 * tpm.grad;
}

ObjectiveValue ObjectiveWorkspace::melm_value(const ProjectionMatrix& v,
                                              double penalty_weight) const {
  check_projection(v, d(), k_);
  const double lpp = cross_ip(x_plus_, x_plus_, sigma_pp_, v.v, false).log_ip;
  const double lmm = cross_ip(x_minus_, x_minus_, sigma_mm_, v.v, false).log_ip;
  const double lpm = cross_ip(x_plus_, x_minus_, sigma_pm_, v.v, false).log_ip;
  ObjectiveValue out;
  out.log_ip_pp = lpp;
  out.log_ip_mm = lmm;
  out.log_ip_pm = lpm;
  out.dcs = lpp + lmm - 2.0 * lpm;
  out.penalty = penalty_weight * penalty(v);
  out.melm = out.dcs - out.penalty;
  return out;
}

Eigen::MatrixXd ObjectiveWorkspace::melm_gradient(const ProjectionMatrix& v,
                                                  double penalty_weight) const {
  return dcs_gradient(v) - penalty_weight * penalty_gradient(v);
}

std::pair<ObjectiveValue, Eigen::MatrixXd>
ObjectiveWorkspace::melm_value_and_gradient(const ProjectionMatrix& v,
                                            double penalty_weight) const {
  check_projection(v, d(), k_);
  const auto tpp = cross_ip(x_plus_, x_plus_, sigma_pp_, v.v, true);
  const auto tmm = cross_ip(x_minus_, x_minus_, sigma_mm_, v.v, true);
  const auto tpm = cross_ip(x_plus_, x_minus_, sigma_pm_, v.v, true);
  ObjectiveValue val;
  val.log_ip_pp = tpp.log_ip;
  val.log_ip_mm = tmm.log_ip;
  val.log_ip_pm = tpm.log_ip;
  val.dcs = tpp.log_ip + tmm.log_ip - 2.0 * tpm.log_ip;
  val.penalty = penalty_weight * penalty(v);
  val.melm = val.dcs - val.penalty;
  Eigen::MatrixXd grad = tpp.grad + tmm.grad - 2.0 * tpm.grad -
                         penalty_weight * penalty_gradient(v);
  return {std::move(val), std::move(grad)};
}

std::pair<double, double> ObjectiveWorkspace::decompose(
    const ProjectionMatrix& v) const {
  check_projection(v, d(), k_);
  const double lpp = cross_ip(x_plus_, x_plus_, sigma_pp_, v.v, false).log_ip;
  const double lmm = cross_ip(x_minus_, x_minus_, sigma_mm_, v.v, false).log_ip;
  const double lpm = cross_ip(x_plus_, x_minus_, sigma_pm_, v.v, false).log_ip;
  const double fitting = -2.0 * lpm;        // twice the Renyi cross entropy
  const double regularizing = -lpp - lmm;   // sum of the class entropies
  return {fitting, regularizing};
}

double dcs(const ProjectionMatrix& v, const Eigen::MatrixXd& x_plus,
           const Eigen::MatrixXd& x_minus, const BandwidthConfig& cfg) {
  return ObjectiveWorkspace(x_plus, x_minus, v.k(), cfg).dcs(v);
}

Eigen::MatrixXd dcs_gradient(const ProjectionMatrix& v,
                             const Eigen::MatrixXd& x_plus,
                             const Eigen::MatrixXd& x_minus,
                             const BandwidthConfig& cfg) {
  return ObjectiveWorkspace(x_plus, x_minus, v.k(), cfg).dcs_gradient(v);
}

double penalty(const ProjectionMatrix& v) {
  const auto k = v.k();
  return (v.gram() - Eigen::MatrixXd::Identity(k, k)).squaredNorm();
}

Eigen::MatrixXd penalty_gradient(const ProjectionMatrix& v) {
  return 4.0 * v.v * v.gram() - 4.0 * v.v;
}

ObjectiveValue melm_value(const ProjectionMatrix& v,
                          const Eigen::MatrixXd& x_plus,
                          const Eigen::MatrixXd& x_minus,
                          const BandwidthConfig& cfg, double penalty_weight) {
  return ObjectiveWorkspace(x_plus, x_minus, v.k(), cfg)
      .melm_value(v, penalty_weight);
}

Eigen::MatrixXd melm_gradient(const ProjectionMatrix& v,
                              const Eigen::MatrixXd& x_plus,
                              const Eigen::MatrixXd& x_minus,
                              const BandwidthConfig& cfg,
                              double penalty_weight) {
  return ObjectiveWorkspace(x_plus, x_minus, v.k(), cfg)
      .melm_gradient(v, penalty_weight);
}

std::pair<double, double> decompose(const ProjectionMatrix& v,
                                    const Eigen::MatrixXd& x_plus,
                                    const Eigen::MatrixXd& x_minus,
                                    const BandwidthConfig& cfg) {
  return ObjectiveWorkspace(x_plus, x_minus, v.k(), cfg).decompose(v);
}

}  // namespace melm
