#pragma once

#include <Eigen/Dense>
#include <utility>

#include "melm/density.hpp"
#include "melm/projection.hpp"

namespace melm {

/// Objective evaluation with its term breakdown. melm = dcs - penalty holds
/// exactly; dcs = log_ip_pp + log_ip_mm - 2 log_ip_pm.
struct ObjectiveValue {
  double dcs = 0.0;
  double penalty = 0.0;
  double melm = 0.0;
  double log_ip_pp = 0.0;
  double log_ip_mm = 0.0;
  double log_ip_pm = 0.0;
};

/// Binds one (X_plus, X_minus, k, gamma) instance and caches the three pooled
/// kernel covariances. Evaluation is const and safe to share across threads.
class ObjectiveWorkspace {
 public:
  ObjectiveWorkspace(Eigen::MatrixXd x_plus, Eigen::MatrixXd x_minus, int k,
                     const BandwidthConfig& cfg);

  double dcs(const ProjectionMatrix& v) const;
  Eigen::MatrixXd dcs_gradient(const ProjectionMatrix& v) const;

  ObjectiveValue melm_value(const ProjectionMatrix& v,
                            double penalty_weight = 1.0) const;
  Eigen::MatrixXd melm_gradient(const ProjectionMatrix& v,
                                double penalty_weight = 1.0) const;

  /// Value and gradient in one pass over the pair sums.
  std::pair<ObjectiveValue, Eigen::MatrixXd> melm_value_and_gradient(
      const ProjectionMatrix& v, double penalty_weight = 1.0) const;

  /// (fitting, regularizing): 2 * cross entropy and the sum of the two class
  /// entropies; fitting - regularizing = dcs.
  std::pair<double, double> decompose(const ProjectionMatrix& v) const;

  int k() const { return k_; }
  int d() const { return static_cast<int>(x_plus_.rows()); }
  const BandwidthConfig& bandwidth() const { return cfg_; }
  const Eigen::MatrixXd& x_plus() const { return x_plus_; }
  const Eigen::MatrixXd& x_minus() const { return x_minus_; }

 private:
  Eigen::MatrixXd x_plus_;
  Eigen::MatrixXd x_minus_;
  int k_;
  BandwidthConfig cfg_;
  Eigen::MatrixXd sigma_pp_;
  Eigen::MatrixXd sigma_mm_;
  Eigen::MatrixXd sigma_pm_;
};

/// Cauchy-Schwarz divergence of the projected class KDEs. Nonnegative; zero
/// iff the projected estimates coincide.
double dcs(const ProjectionMatrix& v, const Eigen::MatrixXd& x_plus,
           const Eigen::MatrixXd& x_minus, const BandwidthConfig& cfg);

Eigen::MatrixXd dcs_gradient(const ProjectionMatrix& v,
                             const Eigen::MatrixXd& x_plus,
                             const Eigen::MatrixXd& x_minus,
                             const BandwidthConfig& cfg);

/// || V^T V - I ||_F^2.
double penalty(const ProjectionMatrix& v);

/// 4 V V^T V - 4 V.
Eigen::MatrixXd penalty_gradient(const ProjectionMatrix& v);

ObjectiveValue melm_value(const ProjectionMatrix& v,
                          const Eigen::MatrixXd& x_plus,
                          const Eigen::MatrixXd& x_minus,
                          const BandwidthConfig& cfg,
                          double penalty_weight = 1.0);

Eigen::MatrixXd melm_gradient(const ProjectionMatrix& v,
                              const Eigen::MatrixXd& x_plus,
                              const Eigen::MatrixXd& x_minus,
                              const BandwidthConfig& cfg,
                              double penalty_weight = 1.0);

std::pair<double, double> decompose(const ProjectionMatrix& v,
                                    const Eigen::MatrixXd& x_plus,
                                    const Eigen::MatrixXd& x_minus,
                                    const BandwidthConfig& cfg);

}  // namespace melm
