#include "melm/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "melm/cross_ip.hpp"
#include "melm/error.hpp"
#include "melm/linalg.hpp"

namespace melm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

void check_gamma(const BandwidthConfig& cfg) {
  if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) {
    throw ConfigError("bandwidth gamma must be a positive finite number");
  }
}
}  // namespace

Eigen::MatrixXd covariance(const Eigen::MatrixXd& points) {
  const auto n = points.cols();
  if (n < 2) {
    throw ValidationError("covariance needs at least 2 samples, got " +
                          std::to_string(n));
  }
  const Eigen::VectorXd mean = points.rowwise().mean();
  const Eigen::MatrixXd centered = points.colwise() - mean;
  return symmetrized(centered * centered.transpose() /
                     static_cast<double>(n - 1));
}

double silverman_bandwidth(int n, int k, const BandwidthConfig& cfg) {
  check_gamma(cfg);
  if (n < 1) throw ConfigError("bandwidth needs a positive sample count");
  if (k < 1) throw ConfigError("bandwidth needs a positive target dimension");
  const double exponent = 1.0 / (static_cast<double>(k) + 4.0);
  return cfg.gamma * std::pow(4.0 / (static_cast<double>(k) + 2.0), exponent) *
         std::pow(static_cast<double>(n), -exponent);
}

PooledBandwidthCov pooled_bandwidth_cov(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& b, int k,
                                        const BandwidthConfig& cfg) {
  if (a.rows() != b.rows()) {
    throw ValidationError("class matrices have different dimensions");
  }
  if (a.cols() < 2 || b.cols() < 2) {
    throw ValidationError("each class needs at least 2 samples for the pooled "
                          "kernel covariance");
  }
  const double h_a = silverman_bandwidth(static_cast<int>(a.cols()), k, cfg);
  const double h_b = silverman_bandwidth(static_cast<int>(b.cols()), k, cfg);
  PooledBandwidthCov out;
  out.sigma_ab =
      symmetrized(h_a * h_a * covariance(a) + h_b * h_b * covariance(b));
  out.n_a = static_cast<int>(a.cols());
  out.n_b = static_cast<int>(b.cols());
  out.k = k;
  return out;
}

KdeModel fit_kde(const Eigen::MatrixXd& projected_points,
                 const BandwidthConfig& cfg) {
  const int k = static_cast<int>(projected_points.rows());
  const int n = static_cast<int>(projected_points.cols());
  const double h = silverman_bandwidth(n, k, cfg);
  KdeModel model;
  model.centers = projected_points;
  model.covariance = h * h * covariance(projected_points);
  const auto llt = spd_cholesky_inplace(model.covariance, "KDE kernel covariance");
  model.log_norm =
      -0.5 * static_cast<double>(k) * kLog2Pi - 0.5 * logdet_from_llt(llt);
  model.cov_inverse =
      llt.solve(Eigen::MatrixXd::Identity(k, k));
  return model;
}

double kde_log_density_at(const KdeModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.centers.rows()) {
    throw ValidationError("query point dimension does not match the KDE");
  }
  if (!x.allFinite()) throw ValidationError("query point has non-finite entries");
  const auto n = model.centers.cols();
  double max_exponent = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd exponents(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd diff = x - model.centers.col(i);
    exponents(i) = -0.5 * diff.dot(model.cov_inverse * diff);
    max_exponent = std::max(max_exponent, exponents(i));
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += std::exp(exponents(i) - max_exponent);
  }
  return model.log_norm + max_exponent + std::log(sum) -
         std::log(static_cast<double>(n));
}

double renyi_entropy_gaussian(const Eigen::MatrixXd& sigma, int k) {
  if (sigma.rows() != k || sigma.cols() != k) {
    throw ValidationError("covariance shape does not match the dimension");
  }
  const auto llt = spd_cholesky(sigma, "Gaussian covariance");
  return 0.5 * static_cast<double>(k) * std::log(4.0 * std::numbers::pi) +
         0.5 * logdet_from_llt(llt);
}

double log_cross_ip(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const ProjectionMatrix& v, const BandwidthConfig& cfg) {
  if (a.rows() != v.d() || b.rows() != v.d()) {
    throw ValidationError("class matrices do not match the projection dimension");
  }
  const auto pooled = pooled_bandwidth_cov(a, b, v.k(), cfg);
  return cross_ip(a, b, pooled.sigma_ab, v.v, /*with_grad=*/false).log_ip;
}

double renyi_cross_entropy(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const ProjectionMatrix& v,
                           const BandwidthConfig& cfg) {
  return -log_cross_ip(a, b, v, cfg);
}

}  // namespace melm
