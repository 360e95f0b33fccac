#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "melm/dataset.hpp"
#include "melm/density.hpp"
#include "melm/optimizer.hpp"
#include "melm/projection.hpp"

namespace melm {

enum class Method { Melm, Pca, Cpca, TwoEPca, Ppca, Identity };

const char* method_name(Method method);
Method method_from_name(const std::string& name);  // throws ConfigError
std::vector<Method> parse_method_list(const std::string& comma_separated);

/// Balanced accuracy: mean of the two per-class recalls. y_true must contain
/// both classes.
double bac(const std::vector<int>& y_true, const std::vector<int>& y_pred);

/// Exact Euclidean nearest-neighbor majority vote; ties go to -1.
std::vector<int> knn_predict(const Eigen::MatrixXd& train_points,
                             const std::vector<int>& train_labels,
                             const Eigen::MatrixXd& test_points,
                             int neighbors);

/// Per-class KDE fit on the (projected) training points; each test point
/// gets the class of higher log-density, ties to -1. Class priors are
/// ignored: the decision is balanced, matching the balanced-accuracy metric.
std::vector<int> kde_predict(const Eigen::MatrixXd& train_points,
                             const std::vector<int>& train_labels,
                             const Eigen::MatrixXd& test_points,
                             const BandwidthConfig& cfg);

struct EvalConfig {
  int k = 2;
  int folds = 5;
  int inner_folds = 3;  // classifier hyperparameter selection
  std::uint64_t seed = 0;
  std::vector<int> neighbor_grid = {1, 3, 5, 9};
  std::vector<double> gamma_grid = {0.25, 0.5, 1.0, 1.5, 2.0};
  int melm_restarts = 16;
  double melm_gamma = 1.0;  // bandwidth scale used when fitting projections
  OptimConfig optim;        // per-restart optimizer settings
  double subset_fraction = 1.0;  // separability protocol: per-repeat sample share
  int repeats = 5;               // separability protocol: repetition count
};

/// Fits a projection on training data only. The seam exists so tests can
/// substitute instrumented or deliberately degenerate fitters.
using ProjectionFitter = std::function<ProjectionMatrix(
    const LabeledDataset& train, int k, std::uint64_t seed)>;

ProjectionFitter fitter_for(Method method, const EvalConfig& cfg);

struct NamedFitter {
  std::string name;
  ProjectionFitter fit;
};

/// One (method, classifier, fold) score plus the hyperparameters the inner
/// cross-validation selected for it.
struct ScoreRow {
  std::string method;
  std::string classifier;  // "knn" or "kde"
  int repeat = 0;          // separability protocol only; 0 under pipeline
  int fold = 0;
  double bac = 0.0;
  int neighbors = 0;    // knn rows
  double gamma = 0.0;   // kde rows
};

struct MethodAggregate {
  std::string method;
  double mean_bac = 0.0;    // pipeline: best classifier's fold mean;
                            // separability: mean over classifiers and folds
  double stddev_bac = 0.0;  // over the folds (pipeline, best classifier)
                            // or over per-repeat means (separability)
  double knn_mean = 0.0;
  double kde_mean = 0.0;
  std::string best_classifier;          // pipeline protocol
  std::vector<double> per_repeat_mean;  // separability protocol
};

struct EvalFailure {
  std::string method;
  int repeat = 0;
  int fold = 0;  // -1 when the failure is not tied to one fold
  std::string message;
};

struct EvalReport {
  std::string protocol;  // "pipeline" or "separability"
  std::string dataset_fingerprint;
  int d = 0;
  int n = 0;
  EvalConfig config;
  std::vector<std::string> methods;
  std::vector<ScoreRow> scores;
  std::vector<MethodAggregate> aggregates;
  std::vector<EvalFailure> failures;
};

/// Train/test protocol: per outer fold, the projection is fitted on the
/// training split only; classifier hyperparameters come from inner
/// cross-validation on the projected training split; each method's headline
/// number is its best classifier's mean BAC.
EvalReport pipeline_benchmark(const LabeledDataset& ds,
                              const std::vector<Method>& methods,
                              const EvalConfig& cfg);
EvalReport pipeline_benchmark(const LabeledDataset& ds,
                              const std::vector<NamedFitter>& methods,
                              const EvalConfig& cfg);

/// Separability protocol: per repeat, a stratified subset is drawn, the
/// projection is fitted once on all of it, and cross-validation applies only
/// to the classifiers on the projected points; a method's score is the mean
/// BAC over both classifiers.
EvalReport visual_separability(const LabeledDataset& ds,
                               const std::vector<Method>& methods,
                               const EvalConfig& cfg);
EvalReport visual_separability(const LabeledDataset& ds,
                               const std::vector<NamedFitter>& methods,
                               const EvalConfig& cfg);

/// Stable JSON rendering of a report (schema documented in the README).
std::string to_json_string(const EvalReport& report);

}  // namespace melm
