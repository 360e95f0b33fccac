#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "melm/objective.hpp"
#include "melm/projection.hpp"
#include "melm/rng.hpp"

namespace melm {

struct OptimConfig {
  int max_iters = 500;
  double grad_tol = 1e-6;    // stop when ||grad||_max falls to or below this
  double step_tol = 1e-10;   // stop when the objective improves by less
  int memory = 10;           // L-BFGS history length
  std::uint64_t seed = 0;
  double penalty_weight = 1.0;
  double ls_sufficient = 1e-4;  // Armijo sufficient-increase constant
  double ls_shrink = 0.5;
  int ls_max_steps = 40;
};

enum class StopReason { GradientNorm, ObjectiveChange, MaxIters, LineSearchFailed };

const char* stop_reason_name(StopReason reason);

struct MaximizeResult {
  ProjectionMatrix v;    // final iterate, re-orthonormalized
  double melm = 0.0;     // objective at the raw final iterate
  double dcs = 0.0;      // re-evaluated at the orthonormalized v
  double penalty = 0.0;  // at the raw final iterate
  int iterations = 0;    // accepted steps
  StopReason stop = StopReason::MaxIters;
  std::vector<double> melm_history;  // objective at start point and after each accepted step
};

/// Ascends the penalized objective from v0 with limited-memory quasi-Newton
/// steps and a backtracking line search; falls back to plain gradient ascent
/// when curvature pairs are unusable. Accepted steps never decrease the
/// objective.
MaximizeResult maximize_melm(const ObjectiveWorkspace& objective,
                             const Eigen::MatrixXd& v0,
                             const OptimConfig& cfg = {});

/// Orthonormalization of a d x k standard-Gaussian draw: uniform over the
/// Stiefel manifold, deterministic per seed.
ProjectionMatrix random_orthonormal(int d, int k, std::uint64_t seed);
ProjectionMatrix random_orthonormal(int d, int k, Rng& rng);

struct RestartTrace {
  std::vector<double> dcs;         // final dcs per restart, in restart order
  std::vector<int> iterations;     // accepted steps per restart
  std::vector<MaximizeResult> runs;
  int best_index = -1;             // ties go to the lowest restart index
};

/// Fitted projection plus the provenance needed to reproduce it.
struct MelmModel {
  ProjectionMatrix v;
  double gamma = 1.0;
  double dcs_achieved = 0.0;
  int d = 0;
  int k = 0;
  int restarts = 0;
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;  // callers fill this in
};

/// Runs `restarts` independent optimizations (restart i starts from
/// random_orthonormal(d, k, cfg.seed + i)) and keeps the best final dcs.
/// Restarts run in parallel; the winner is chosen by restart order, so the
/// result does not depend on the thread count. Throws only if every restart
/// fails.
std::pair<MelmModel, RestartTrace> multistart(const ObjectiveWorkspace& objective,
                                              int restarts,
                                              const OptimConfig& cfg = {});

/// Entry s (1-based) is E[max of a uniform random s-subset] of the given
/// values, computed exactly from order statistics. Non-decreasing in s;
/// entry 1 is the mean and entry n the maximum.
std::vector<double> expected_max_curve(const std::vector<double>& values,
                                       int s_max);

}  // namespace melm
