#include "melm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <utility>

#include "melm/error.hpp"
#include "melm/runtime.hpp"

namespace melm {

namespace {

double frobenius_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

void check_optim_config(const OptimConfig& cfg) {
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(cfg.grad_tol > 0.0)) throw ConfigError("grad_tol must be positive");
  if (!(cfg.step_tol > 0.0)) throw ConfigError("step_tol must be positive");
  if (cfg.memory < 1) throw ConfigError("optimizer memory must be at least 1");
  if (!(cfg.ls_sufficient > 0.0) || cfg.ls_sufficient >= 1.0) {
    throw ConfigError("line-search sufficient-increase constant must lie in (0,1)");
  }
  if (!(cfg.ls_shrink > 0.0) || cfg.ls_shrink >= 1.0) {
    throw ConfigError("line-search shrink factor must lie in (0,1)");
  }
  if (cfg.ls_max_steps < 1) throw ConfigError("line search needs at least one step");
  if (!(cfg.penalty_weight >= 0.0)) throw ConfigError("penalty weight must be >= 0");
}

struct CurvaturePairs {
  std::deque<Eigen::MatrixXd> s;
  std::deque<Eigen::MatrixXd> y;
  std::deque<double> rho;

  void clear() {
    s.clear();
    y.clear();
    rho.clear();
  }
};

/// Two-loop recursion: approximate inverse-Hessian times gradient for the
/// minimization form, returned as a descent direction (already negated).
Eigen::MatrixXd descent_direction(const Eigen::MatrixXd& grad,
                                  const CurvaturePairs& mem) {
  Eigen::MatrixXd q = grad;
  const int m = static_cast<int>(mem.s.size());
  std::vector<double> alpha(m, 0.0);
  for (int i = m - 1; i >= 0; --i) {
    alpha[i] = mem.rho[i] * frobenius_dot(mem.s[i], q);
    q -= alpha[i] * mem.y[i];
  }
  if (m > 0) {
    const double scale = frobenius_dot(mem.s[m - 1], mem.y[m - 1]) /
                         frobenius_dot(mem.y[m - 1], mem.y[m - 1]);
    q *= scale;
  }
  for (int i = 0; i < m; ++i) {
    const double beta = mem.rho[i] * frobenius_dot(mem.y[i], q);
    q += (alpha[i] - beta) * mem.s[i];
  }
  return -q;
}

}  // namespace

const char* stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::GradientNorm:
      return "gradient-norm";
    case StopReason::ObjectiveChange:
      return "objective-change";
    case StopReason::MaxIters:
      return "max-iterations";
    case StopReason::LineSearchFailed:
      return "line-search-failed";
  }
  return "unknown";
}

MaximizeResult maximize_melm(const ObjectiveWorkspace& objective,
                             const Eigen::MatrixXd& v0,
                             const OptimConfig& cfg) {
  check_optim_config(cfg);
  if (v0.rows() != objective.d() || v0.cols() != objective.k()) {
    throw ValidationError("start point shape does not match the objective");
  }
  ProjectionMatrix::validate(v0);

  // Internally minimize f = -melm so the quasi-Newton bookkeeping is the
  // textbook form. Evaluation failures (collapsed projections mid-search)
  // surface as "no value", which the line search treats as a rejected step.
  const auto try_eval = [&](const Eigen::MatrixXd& point, ObjectiveValue& value,
                            Eigen::MatrixXd& grad) -> bool {
    try {
      ProjectionMatrix pm(point);
      std::tie(value, grad) =
          objective.melm_value_and_gradient(pm, cfg.penalty_weight);
    } catch (const ValidationError&) {
      return false;
    } catch (const SingularMatrixError&) {
      return false;
    }
    return std::isfinite(value.melm) && grad.allFinite();
  };

  Eigen::MatrixXd v = v0;
  ObjectiveValue value;
  Eigen::MatrixXd grad_melm;
  if (!try_eval(v, value, grad_melm)) {
    throw ValidationError("objective is not finite at the start point");
  }
  double f = -value.melm;
  Eigen::MatrixXd gf = -grad_melm;

  MaximizeResult result;
  result.melm_history.push_back(value.melm);
  result.stop = StopReason::MaxIters;

  CurvaturePairs memory;
  int accepted = 0;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    if (gf.cwiseAbs().maxCoeff() <= cfg.grad_tol) {
      result.stop = StopReason::GradientNorm;
      break;
    }

    Eigen::MatrixXd direction = descent_direction(gf, memory);
    double slope = frobenius_dot(gf, direction);
    bool steepest = memory.s.empty();
    if (!(slope < 0.0)) {
      memory.clear();
      direction = -gf;
      slope = -frobenius_dot(gf, gf);
      steepest = true;
    }

    // Backtracking Armijo search; on failure retry once from the steepest
    // direction before giving up.
    Eigen::MatrixXd v_next;
    ObjectiveValue value_next;
    Eigen::MatrixXd grad_next;
    double f_next = 0.0;
    bool found = false;
    for (int attempt = 0; attempt < 2 && !found; ++attempt) {
      double alpha = 1.0;
      for (int ls = 0; ls < cfg.ls_max_steps; ++ls) {
        Eigen::MatrixXd candidate = v + alpha * direction;
        ObjectiveValue cv;
        Eigen::MatrixXd cg;
        if (try_eval(candidate, cv, cg)) {
          const double cf = -cv.melm;
          if (cf <= f + cfg.ls_sufficient * alpha * slope) {
            v_next = std::move(candidate);
            value_next = cv;
            grad_next = -cg;
            f_next = cf;
            found = true;
            break;
          }
        }
        alpha *= cfg.ls_shrink;
      }
      if (!found && !steepest) {
        memory.clear();
        direction = -gf;
        slope = -frobenius_dot(gf, gf);
        steepest = true;
      } else {
        break;
      }
    }
    if (!found) {
      result.stop = StopReason::LineSearchFailed;
      break;
    }

    const Eigen::MatrixXd s = v_next - v;
    const Eigen::MatrixXd y = grad_next - gf;
    const double sy = frobenius_dot(s, y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      memory.s.push_back(s);
      memory.y.push_back(y);
      memory.rho.push_back(1.0 / sy);
      while (static_cast<int>(memory.s.size()) > cfg.memory) {
        memory.s.pop_front();
        memory.y.pop_front();
        memory.rho.pop_front();
      }
    }

    const double improvement = f - f_next;
    v = std::move(v_next);
    value = value_next;
    gf = std::move(grad_next);
    f = f_next;
    ++accepted;
    result.melm_history.push_back(value.melm);

    if (improvement <= cfg.step_tol) {
      result.stop = StopReason::ObjectiveChange;
      break;
    }
  }

  result.v = orthonormalized(v);
  result.melm = value.melm;
  result.penalty = value.penalty;
  result.dcs = objective.dcs(result.v);
  result.iterations = accepted;
  return result;
}

ProjectionMatrix random_orthonormal(int d, int k, Rng& rng) {
  if (k < 1 || k > d) {
    throw ConfigError("need 1 <= k <= d for a random orthonormal matrix");
  }
  Eigen::MatrixXd m(d, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < d; ++i) {
      m(i, j) = rng.normal();
    }
  }
  return orthonormalized(m);
}

ProjectionMatrix random_orthonormal(int d, int k, std::uint64_t seed) {
  Rng rng(seed);
  return random_orthonormal(d, k, rng);
}

std::pair<MelmModel, RestartTrace> multistart(const ObjectiveWorkspace& objective,
                                              int restarts,
                                              const OptimConfig& cfg) {
  check_optim_config(cfg);
  if (restarts < 1) throw ConfigError("restart count must be at least 1");

  std::vector<MaximizeResult> runs(restarts);
  std::vector<char> succeeded(restarts, 0);
  std::vector<std::string> messages(restarts);

#pragma omp parallel for schedule(dynamic) num_threads(max_threads()) \
    if (restarts > 1)
  for (int i = 0; i < restarts; ++i) {
    try {
      const ProjectionMatrix start = random_orthonormal(
          objective.d(), objective.k(), cfg.seed + static_cast<std::uint64_t>(i));
      runs[i] = maximize_melm(objective, start.v, cfg);
      succeeded[i] = 1;
    } catch (const std::exception& e) {
      messages[i] = e.what();
    }
  }

  RestartTrace trace;
  trace.dcs.resize(restarts);
  trace.iterations.resize(restarts);
  for (int i = 0; i < restarts; ++i) {
    trace.dcs[i] = succeeded[i] ? runs[i].dcs
                                : std::numeric_limits<double>::quiet_NaN();
    trace.iterations[i] = succeeded[i] ? runs[i].iterations : 0;
  }
  trace.runs = std::move(runs);

  int best = -1;
  for (int i = 0; i < restarts; ++i) {
    if (!succeeded[i]) continue;
    if (best < 0 || trace.dcs[i] > trace.dcs[best]) best = i;
  }
  if (best < 0) {
    throw Error("all " + std::to_string(restarts) +
                " restarts failed; first failure: " + messages[0]);
  }
  trace.best_index = best;

  MelmModel model;
  model.v = trace.runs[best].v;
  model.gamma = objective.bandwidth().gamma;
  model.dcs_achieved = trace.runs[best].dcs;
  model.d = objective.d();
  model.k = objective.k();
  model.restarts = restarts;
  model.seed = cfg.seed;
  return {std::move(model), std::move(trace)};
}

std::vector<double> expected_max_curve(const std::vector<double>& values,
                                       int s_max) {
  const int n = static_cast<int>(values.size());
  if (n < 1) throw ConfigError("expected-max curve needs at least one value");
  if (s_max < 1 || s_max > n) {
    throw ConfigError("curve length must satisfy 1 <= s_max <= sample count");
  }
  for (const double value : values) {
    if (!std::isfinite(value)) {
      throw ValidationError("restart values must be finite");
    }
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());

  // E[max of s] = sum_i v_(i) * C(i-1, s-1) / C(n, s) over ascending order
  // statistics; the weights follow the downward recurrence
  // w_n = s/n, w_i = w_{i+1} * (i - s + 1) / i.
  std::vector<double> curve(s_max, 0.0);
  for (int s = 1; s <= s_max; ++s) {
    double weight = static_cast<double>(s) / static_cast<double>(n);
    double acc = weight * sorted[n - 1];
    for (int i = n - 1; i >= s; --i) {
      weight *= static_cast<double>(i - s + 1) / static_cast<double>(i);
      acc += weight * sorted[i - 1];
    }
    curve[s - 1] = acc;
  }
  return curve;
}

}  // namespace melm
