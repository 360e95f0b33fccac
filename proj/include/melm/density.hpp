#pragma once

#include <Eigen/Dense>

#include "melm/projection.hpp"

namespace melm {

struct BandwidthConfig {
  double gamma = 1.0;  // bandwidth scaling hyperparameter, > 0
};

/// Unbiased sample covariance (divisor n-1) of d x n column samples.
/// Symmetric by construction; throws for n < 2.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& points);

/// Bandwidth gamma * (4/(k+2))^(1/(k+4)) * n^(-1/(k+4)) for a KDE of n
/// samples in k dimensions.
double silverman_bandwidth(int n, int k, const BandwidthConfig& cfg);

/// Pooled kernel covariance of two classes in input space:
/// h_A^2 cov(A) + h_B^2 cov(B) with per-class Silverman bandwidths computed
/// for the target dimension k.
struct PooledBandwidthCov {
  Eigen::MatrixXd sigma_ab;  // d x d, symmetric
  int n_a = 0;
  int n_b = 0;
  int k = 0;
};
PooledBandwidthCov pooled_bandwidth_cov(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& b, int k,
                                        const BandwidthConfig& cfg);

/// Gaussian KDE with one shared covariance: mean of N(center_i, covariance).
struct KdeModel {
  Eigen::MatrixXd centers;     // k x n
  Eigen::MatrixXd covariance;  // k x k SPD
  double log_norm = 0.0;       // -(k/2) log(2 pi) - 1/2 logdet(covariance)

  // cached solve factor, set by fit_kde
  Eigen::MatrixXd cov_inverse;
};

/// Fits a KdeModel on k x n projected samples: covariance is
/// silverman^2 * cov(points). Throws when the kernel covariance stays
/// singular after jitter.
KdeModel fit_kde(const Eigen::MatrixXd& projected_points,
                 const BandwidthConfig& cfg);

/// Log of the mixture density at x, evaluated with log-sum-exp so far-away
/// points underflow gracefully instead of hitting -inf.
double kde_log_density_at(const KdeModel& model, const Eigen::VectorXd& x);

/// Renyi quadratic entropy of N(m, sigma): (k/2) log(4 pi) + 1/2 logdet(sigma).
double renyi_entropy_gaussian(const Eigen::MatrixXd& sigma, int k);

/// log of the cross information potential between the KDEs of the two
/// projected classes,
///   log integral de{V^T A} de{V^T B},
/// evaluated in closed form via the pairwise Gaussian identity with
/// log-sum-exp over all |A| * |B| differences. Finite for any finite input.
double log_cross_ip(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const ProjectionMatrix& v, const BandwidthConfig& cfg);

/// Renyi quadratic cross entropy: -log_cross_ip.
double renyi_cross_entropy(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const ProjectionMatrix& v,
                           const BandwidthConfig& cfg);

}  // namespace melm
