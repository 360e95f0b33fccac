#pragma once

#include <Eigen/Dense>

namespace melm {

/// Result of one pairwise cross-information-potential evaluation.
struct CrossIpTerms {
  double log_ip = 0.0;
  Eigen::MatrixXd grad;  // d x k gradient of log_ip w.r.t. V; empty when not requested
};

/// Number of (a, b) pairs per reduction chunk. Partial sums are computed per
/// chunk and combined in chunk order, so results are bit-identical for any
/// thread count.
inline constexpr long long kPairChunk = 8192;

/// Pair weights below exp(kLogWeightCutoff) relative to the dominant pair are
/// skipped; they change the result by less than 1e-17 relative.
inline constexpr double kLogWeightCutoff = -46.0;

/// Serial reference kernel. `sigma_ab` is the pooled kernel covariance in
/// input space (d x d); A, B are d x n_a / d x n_b column samples.
CrossIpTerms cross_ip_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const Eigen::MatrixXd& sigma_ab,
                             const Eigen::MatrixXd& v, bool with_grad);

/// OpenMP kernel over fixed-size pair chunks. The thread count never changes
/// the result bits (chunk partials merge in index order); it agrees with
/// cross_ip_serial to tight relative tolerance, not bit for bit, because the
/// reference uses one global shift instead of per-chunk shifts.
CrossIpTerms cross_ip_parallel(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b,
                               const Eigen::MatrixXd& sigma_ab,
                               const Eigen::MatrixXd& v, bool with_grad);

/// Dispatches by problem size only (never by thread count): small problems
/// run the single-chunk arithmetic directly, large ones the parallel kernel.
CrossIpTerms cross_ip(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const Eigen::MatrixXd& sigma_ab, const Eigen::MatrixXd& v,
                      bool with_grad);

}  // namespace melm
