#include "melm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "melm/baselines.hpp"
#include "melm/error.hpp"
#include "melm/runtime.hpp"
#include "serialize.hpp"

namespace melm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return kNaN;
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (const double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

/// SplitMix64 step over (base, salt, index): derived streams for fitters,
/// fold plans, and inner selections stay well separated and reproducible.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt,
                          std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1) + index;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_eval_config(const EvalConfig& cfg) {
  if (cfg.k < 1) throw ConfigError("target dimension k must be at least 1");
  if (cfg.folds < 2) throw ConfigError("fold count must be at least 2");
  if (cfg.inner_folds < 2) {
    throw ConfigError("inner fold count must be at least 2");
  }
  if (cfg.neighbor_grid.empty()) throw ConfigError("neighbor grid is empty");
  for (const int n : cfg.neighbor_grid) {
    if (n < 1) throw ConfigError("neighbor grid entries must be at least 1");
  }
  if (cfg.gamma_grid.empty()) throw ConfigError("gamma grid is empty");
  for (const double g : cfg.gamma_grid) {
    if (!(g > 0.0)) throw ConfigError("gamma grid entries must be positive");
  }
  if (cfg.melm_restarts < 1) throw ConfigError("restart count must be >= 1");
  if (!(cfg.melm_gamma > 0.0)) throw ConfigError("melm gamma must be positive");
  if (!(cfg.subset_fraction > 0.0) || cfg.subset_fraction > 1.0) {
    throw ConfigError("subset fraction must lie in (0, 1]");
  }
  if (cfg.repeats < 1) throw ConfigError("repeat count must be >= 1");
}

struct LabeledSplit {
  Eigen::MatrixXd train_x;
  std::vector<int> train_y;
  Eigen::MatrixXd test_x;
  std::vector<int> test_y;
};

LabeledSplit split_projected(const Eigen::MatrixXd& points,
                             const std::vector<int>& labels,
                             const std::vector<int>& train_idx,
                             const std::vector<int>& test_idx) {
  LabeledSplit out;
  out.train_x.resize(points.rows(), static_cast<long>(train_idx.size()));
  out.test_x.resize(points.rows(), static_cast<long>(test_idx.size()));
  out.train_y.reserve(train_idx.size());
  out.test_y.reserve(test_idx.size());
  for (std::size_t i = 0; i < train_idx.size(); ++i) {
    out.train_x.col(static_cast<long>(i)) = points.col(train_idx[i]);
    out.train_y.push_back(labels[train_idx[i]]);
  }
  for (std::size_t i = 0; i < test_idx.size(); ++i) {
    out.test_x.col(static_cast<long>(i)) = points.col(test_idx[i]);
    out.test_y.push_back(labels[test_idx[i]]);
  }
  return out;
}

struct Selected {
  bool knn_ok = false;
  int neighbors = 0;
  std::string knn_error;
  bool kde_ok = false;
  double gamma = 0.0;
  std::string kde_error;
};

/// Chooses the neighbor count and the classifier bandwidth by mean BAC over
/// an inner stratified cross-validation of the (already projected) training
/// points. Ties go to the earlier grid entry.
Selected select_hyperparams(const Eigen::MatrixXd& points,
                            const std::vector<int>& labels,
                            const EvalConfig& cfg, std::uint64_t seed) {
  Selected out;
  LabeledDataset proj;
  proj.points = points;
  proj.labels = labels;

  std::vector<LabeledSplit> splits;
  try {
    const FoldPlan plan = split_kfold(proj, cfg.inner_folds, seed);
    for (int f = 0; f < cfg.inner_folds; ++f) {
      splits.push_back(split_projected(points, labels, plan.train_indices(f),
                                       plan.test_indices(f)));
    }
  } catch (const Error& e) {
    out.knn_error = e.what();
    out.kde_error = e.what();
    return out;
  }

  double best_knn = -1.0;
  for (const int neighbors : cfg.neighbor_grid) {
    if (neighbors < 1) continue;
    bool usable = true;
    std::vector<double> scores;
    for (const auto& split : splits) {
      if (neighbors > split.train_x.cols()) {
        usable = false;
        break;
      }
      scores.push_back(bac(split.test_y,
                           knn_predict(split.train_x, split.train_y,
                                       split.test_x, neighbors)));
    }
    if (!usable) continue;
    const double score = mean_of(scores);
    if (score > best_knn) {
      best_knn = score;
      out.neighbors = neighbors;
      out.knn_ok = true;
    }
  }
  if (!out.knn_ok) {
    out.knn_error = "no usable neighbor count in the grid";
  }

  double best_kde = -1.0;
  std::string last_kde_error = "no usable bandwidth in the grid";
  for (const double gamma : cfg.gamma_grid) {
    std::vector<double> scores;
    bool usable = true;
    for (const auto& split : splits) {
      try {
        scores.push_back(bac(split.test_y,
                             kde_predict(split.train_x, split.train_y,
                                         split.test_x, BandwidthConfig{gamma})));
      } catch (const Error& e) {
        usable = false;
        last_kde_error = e.what();
        break;
      }
    }
    if (!usable) continue;
    const double score = mean_of(scores);
    if (score > best_kde) {
      best_kde = score;
      out.gamma = gamma;
      out.kde_ok = true;
    }
  }
  if (!out.kde_ok) {
    out.kde_error = last_kde_error;
  }
  return out;
}

struct TaskOutput {
  std::vector<ScoreRow> rows;
  std::vector<EvalFailure> failures;
};

/// Scores one projected train/test split with both classifiers, selecting
/// hyperparameters on the training part only.
void score_split(const std::string& method, int repeat, int fold,
                 const LabeledSplit& split, const EvalConfig& cfg,
                 std::uint64_t selection_seed, TaskOutput& out) {
  const Selected sel =
      select_hyperparams(split.train_x, split.train_y, cfg, selection_seed);
  if (sel.knn_ok) {
    ScoreRow row;
    row.method = method;
    row.classifier = "knn";
    row.repeat = repeat;
    row.fold = fold;
    row.neighbors = std::min<int>(sel.neighbors,
                                  static_cast<int>(split.train_x.cols()));
    row.bac = bac(split.test_y, knn_predict(split.train_x, split.train_y,
                                            split.test_x, row.neighbors));
    out.rows.push_back(std::move(row));
  } else {
    out.failures.push_back({method, repeat, fold, "knn: " + sel.knn_error});
  }
  if (sel.kde_ok) {
    try {
      ScoreRow row;
      row.method = method;
      row.classifier = "kde";
      row.repeat = repeat;
      row.fold = fold;
      row.gamma = sel.gamma;
      row.bac = bac(split.test_y,
                    kde_predict(split.train_x, split.train_y, split.test_x,
                                BandwidthConfig{sel.gamma}));
      out.rows.push_back(std::move(row));
    } catch (const Error& e) {
      out.failures.push_back({method, repeat, fold,
                              std::string("kde: ") + e.what()});
    }
  } else {
    out.failures.push_back({method, repeat, fold, "kde: " + sel.kde_error});
  }
}

/// Stratified subsample: per class, a seeded shuffle picks ceil(fraction * n)
/// samples, which are then restored to dataset order.
LabeledDataset stratified_subsample(const LabeledDataset& ds, double fraction,
                                    std::uint64_t seed) {
  if (fraction >= 1.0) return ds;
  std::vector<int> minus_idx;
  std::vector<int> plus_idx;
  for (int i = 0; i < ds.n(); ++i) {
    (ds.labels[i] == -1 ? minus_idx : plus_idx).push_back(i);
  }
  Rng rng(seed);
  std::vector<int> chosen;
  for (auto* cls : {&minus_idx, &plus_idx}) {
    rng.shuffle(*cls);
    const auto keep = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(cls->size())));
    chosen.insert(chosen.end(), cls->begin(),
                  cls->begin() + static_cast<long>(std::max<std::size_t>(keep, 1)));
  }
  std::sort(chosen.begin(), chosen.end());
  return take_columns(ds, chosen);
}

EvalReport make_report(const char* protocol, const LabeledDataset& ds,
                       const std::vector<NamedFitter>& methods,
                       const EvalConfig& cfg) {
  EvalReport report;
  report.protocol = protocol;
  report.dataset_fingerprint = dataset_fingerprint(ds);
  report.d = ds.d();
  report.n = ds.n();
  report.config = cfg;
  for (const auto& method : methods) report.methods.push_back(method.name);
  return report;
}

std::vector<double> scores_of(const std::vector<ScoreRow>& rows,
                              const std::string& method,
                              const char* classifier) {
  std::vector<double> out;
  for (const auto& row : rows) {
    if (row.method == method &&
        (classifier == nullptr || row.classifier == classifier)) {
      out.push_back(row.bac);
    }
  }
  return out;
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::Melm:
      return "melm";
    case Method::Pca:
      return "pca";
    case Method::Cpca:
      return "cpca";
    case Method::TwoEPca:
      return "2epca";
    case Method::Ppca:
      return "ppca";
    case Method::Identity:
      return "identity";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  for (const Method m : {Method::Melm, Method::Pca, Method::Cpca,
                         Method::TwoEPca, Method::Ppca, Method::Identity}) {
    if (name == method_name(m)) return m;
  }
  throw ConfigError("unknown method '" + name +
                    "' (expected melm, pca, cpca, 2epca, ppca, or identity)");
}

std::vector<Method> parse_method_list(const std::string& comma_separated) {
  std::vector<Method> out;
  std::size_t begin = 0;
  while (begin <= comma_separated.size()) {
    const auto pos = comma_separated.find(',', begin);
    const auto end = pos == std::string::npos ? comma_separated.size() : pos;
    std::string token = comma_separated.substr(begin, end - begin);
    // strip surrounding spaces
    while (!token.empty() && token.front() == ' ') token.erase(token.begin());
    while (!token.empty() && token.back() == ' ') token.pop_back();
    if (!token.empty()) out.push_back(method_from_name(token));
    if (pos == std::string::npos) break;
    begin = pos + 1;
  }
  if (out.empty()) throw ConfigError("method list is empty");
  return out;
}

double bac(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size()) {
    throw ValidationError("label vectors must be nonempty and equally long");
  }
  long tp = 0;
  long fn = 0;
  long tn = 0;
  long fp = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if ((y_true[i] != -1 && y_true[i] != 1) ||
        (y_pred[i] != -1 && y_pred[i] != 1)) {
      throw ValidationError("labels must be -1 or +1");
    }
    if (y_true[i] == 1) {
      (y_pred[i] == 1 ? tp : fn) += 1;
    } else {
      (y_pred[i] == -1 ? tn : fp) += 1;
    }
  }
  if (tp + fn == 0 || tn + fp == 0) {
    throw ValidationError("balanced accuracy needs both classes among the "
                          "reference labels");
  }
  return 0.5 * (static_cast<double>(tp) / static_cast<double>(tp + fn) +
                static_cast<double>(tn) / static_cast<double>(tn + fp));
}

std::vector<int> knn_predict(const Eigen::MatrixXd& train_points,
                             const std::vector<int>& train_labels,
                             const Eigen::MatrixXd& test_points,
                             int neighbors) {
  const auto n = train_points.cols();
  if (n < 1) throw ValidationError("empty training set");
  if (static_cast<std::size_t>(n) != train_labels.size()) {
    throw ValidationError("training label count mismatch");
  }
  if (neighbors < 1 || neighbors > n) {
    throw ConfigError("neighbor count must lie in [1, training size]");
  }
  if (test_points.rows() != train_points.rows()) {
    throw ValidationError("test dimension does not match training dimension");
  }

  std::vector<int> predictions(test_points.cols());
  std::vector<std::pair<double, int>> order(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < test_points.cols(); ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      order[static_cast<std::size_t>(i)] = {
          (train_points.col(i) - test_points.col(t)).squaredNorm(),
          static_cast<int>(i)};
    }
    // Distance ties resolve by training index so predictions are stable.
    std::sort(order.begin(), order.end());
    long vote = 0;
    for (int i = 0; i < neighbors; ++i) vote += train_labels[order[i].second];
    predictions[t] = vote > 0 ? 1 : -1;  // exact tie goes to -1
  }
  return predictions;
}

std::vector<int> kde_predict(const Eigen::MatrixXd& train_points,
                             const std::vector<int>& train_labels,
                             const Eigen::MatrixXd& test_points,
                             const BandwidthConfig& cfg) {
  if (static_cast<std::size_t>(train_points.cols()) != train_labels.size()) {
    throw ValidationError("training label count mismatch");
  }
  if (test_points.rows() != train_points.rows()) {
    throw ValidationError("test dimension does not match training dimension");
  }
  long n_minus = 0;
  for (const int label : train_labels) n_minus += label == -1 ? 1 : 0;
  const long n_plus = static_cast<long>(train_labels.size()) - n_minus;
  if (n_minus < 2 || n_plus < 2) {
    throw ValidationError("the density classifier needs at least 2 training "
                          "points per class");
  }
  Eigen::MatrixXd minus(train_points.rows(), n_minus);
  Eigen::MatrixXd plus(train_points.rows(), n_plus);
  long at_minus = 0;
  long at_plus = 0;
  for (long i = 0; i < train_points.cols(); ++i) {
    if (train_labels[static_cast<std::size_t>(i)] == -1) {
      minus.col(at_minus++) = train_points.col(i);
    } else {
      plus.col(at_plus++) = train_points.col(i);
    }
  }
  const KdeModel model_minus = fit_kde(minus, cfg);
  const KdeModel model_plus = fit_kde(plus, cfg);

  std::vector<int> predictions(test_points.cols());
  for (Eigen::Index t = 0; t < test_points.cols(); ++t) {
    const double log_minus = kde_log_density_at(model_minus, test_points.col(t));
    const double log_plus = kde_log_density_at(model_plus, test_points.col(t));
    predictions[t] = log_plus > log_minus ? 1 : -1;  // tie goes to -1
  }
  return predictions;
}

ProjectionFitter fitter_for(Method method, const EvalConfig& cfg) {
  switch (method) {
    case Method::Melm:
      return [cfg](const LabeledDataset& train, int k, std::uint64_t seed) {
        auto [x_minus, x_plus] = class_partition(train);
        const ObjectiveWorkspace objective(x_plus, x_minus, k,
                                           BandwidthConfig{cfg.melm_gamma});
        OptimConfig optim = cfg.optim;
        optim.seed = seed;
        return multistart(objective, cfg.melm_restarts, optim).first.v;
      };
    case Method::Pca:
      return [](const LabeledDataset& train, int k, std::uint64_t) {
        return pca(train.points, k);
      };
    case Method::Cpca:
      return [](const LabeledDataset& train, int k, std::uint64_t) {
        auto [x_minus, x_plus] = class_partition(train);
        return class_pca(x_plus, x_minus, k, /*weighted=*/true);
      };
    case Method::TwoEPca:
      return [](const LabeledDataset& train, int k, std::uint64_t) {
        auto [x_minus, x_plus] = class_partition(train);
        return class_pca(x_plus, x_minus, k, /*weighted=*/false);
      };
    case Method::Ppca:
      return [](const LabeledDataset& train, int k, std::uint64_t) {
        if (k != 2) {
          throw ConfigError("the per-class-component method only produces "
                            "k = 2 projections");
        }
        auto [x_minus, x_plus] = class_partition(train);
        return per_class_pca(x_plus, x_minus);
      };
    case Method::Identity:
      return [](const LabeledDataset& train, int k, std::uint64_t) {
        return identity_projection(train.d(), k);
      };
  }
  throw ConfigError("unknown method");
}

namespace {

std::vector<NamedFitter> named_fitters(const std::vector<Method>& methods,
                                       const EvalConfig& cfg) {
  std::vector<NamedFitter> out;
  out.reserve(methods.size());
  for (const Method m : methods) {
    out.push_back({method_name(m), fitter_for(m, cfg)});
  }
  return out;
}

}  // namespace

EvalReport pipeline_benchmark(const LabeledDataset& ds,
                              const std::vector<NamedFitter>& methods,
                              const EvalConfig& cfg) {
  ds.validate();
  check_eval_config(cfg);
  if (methods.empty()) throw ConfigError("no methods given");
  if (cfg.k > ds.d()) {
    throw ConfigError("target dimension k exceeds the data dimension");
  }

  const FoldPlan plan = split_kfold(ds, cfg.folds, cfg.seed);
  const int n_methods = static_cast<int>(methods.size());
  const int n_tasks = n_methods * cfg.folds;
  std::vector<TaskOutput> outputs(static_cast<std::size_t>(n_tasks));

#pragma omp parallel for schedule(dynamic) num_threads(max_threads()) \
    if (n_tasks > 1)
  for (int task = 0; task < n_tasks; ++task) {
    const int m = task / cfg.folds;
    const int fold = task % cfg.folds;
    const std::string& name = methods[static_cast<std::size_t>(m)].name;
    TaskOutput& out = outputs[static_cast<std::size_t>(task)];
    try {
      const LabeledDataset train = take_columns(ds, plan.train_indices(fold));
      const LabeledDataset test = take_columns(ds, plan.test_indices(fold));
      const ProjectionMatrix v = methods[static_cast<std::size_t>(m)].fit(
          train, cfg.k, derive_seed(cfg.seed, fnv1a(name),
                                    static_cast<std::uint64_t>(fold)));
      LabeledSplit split;
      split.train_x = v.v.transpose() * train.points;
      split.train_y = train.labels;
      split.test_x = v.v.transpose() * test.points;
      split.test_y = test.labels;
      score_split(name, 0, fold, split, cfg,
                  derive_seed(cfg.seed, fnv1a(name) ^ 0x5e1ec7ULL,
                              static_cast<std::uint64_t>(fold)),
                  out);
    } catch (const std::exception& e) {
      out.failures.push_back({name, 0, fold, e.what()});
    }
  }

  EvalReport report = make_report("pipeline", ds, methods, cfg);
  for (const auto& out : outputs) {
    report.scores.insert(report.scores.end(), out.rows.begin(), out.rows.end());
    report.failures.insert(report.failures.end(), out.failures.begin(),
                           out.failures.end());
  }

  for (const auto& method : methods) {
    MethodAggregate agg;
    agg.method = method.name;
    const auto knn_scores = scores_of(report.scores, method.name, "knn");
    const auto kde_scores = scores_of(report.scores, method.name, "kde");
    agg.knn_mean = mean_of(knn_scores);
    agg.kde_mean = mean_of(kde_scores);
    // Headline number: the better classifier; knn wins exact ties.
    const bool kde_wins =
        !kde_scores.empty() &&
        (knn_scores.empty() || agg.kde_mean > agg.knn_mean);
    agg.best_classifier = kde_wins ? "kde" : "knn";
    const auto& best_scores = kde_wins ? kde_scores : knn_scores;
    agg.mean_bac = mean_of(best_scores);
    agg.stddev_bac = sample_stddev(best_scores);
    report.aggregates.push_back(std::move(agg));
  }
  return report;
}

EvalReport pipeline_benchmark(const LabeledDataset& ds,
                              const std::vector<Method>& methods,
                              const EvalConfig& cfg) {
  return pipeline_benchmark(ds, named_fitters(methods, cfg), cfg);
}

EvalReport visual_separability(const LabeledDataset& ds,
                               const std::vector<NamedFitter>& methods,
                               const EvalConfig& cfg) {
  ds.validate();
  check_eval_config(cfg);
  if (methods.empty()) throw ConfigError("no methods given");
  if (cfg.k > ds.d()) {
    throw ConfigError("target dimension k exceeds the data dimension");
  }

  const int n_methods = static_cast<int>(methods.size());
  const int n_tasks = n_methods * cfg.repeats;
  std::vector<TaskOutput> outputs(static_cast<std::size_t>(n_tasks));

#pragma omp parallel for schedule(dynamic) num_threads(max_threads()) \
    if (n_tasks > 1)
  for (int task = 0; task < n_tasks; ++task) {
    const int m = task / cfg.repeats;
    const int repeat = task % cfg.repeats;
    const std::string& name = methods[static_cast<std::size_t>(m)].name;
    TaskOutput& out = outputs[static_cast<std::size_t>(task)];
    try {
      const LabeledDataset subset = stratified_subsample(
          ds, cfg.subset_fraction,
          derive_seed(cfg.seed, 0x5ab5a371ULL,
                      static_cast<std::uint64_t>(repeat)));
      // The projection sees the whole subset; cross-validation below applies
      // to the classifiers only.
      const ProjectionMatrix v = methods[static_cast<std::size_t>(m)].fit(
          subset, cfg.k, derive_seed(cfg.seed, fnv1a(name),
                                     static_cast<std::uint64_t>(repeat)));
      const Eigen::MatrixXd projected = v.v.transpose() * subset.points;
      // The fold plan depends on the repeat only, so every method is scored
      // on identical splits.
      const FoldPlan plan = split_kfold(subset, cfg.folds,
                                        derive_seed(cfg.seed, 0xf01d5ULL,
                                                    static_cast<std::uint64_t>(repeat)));
      for (int fold = 0; fold < cfg.folds; ++fold) {
        const LabeledSplit split =
            split_projected(projected, subset.labels, plan.train_indices(fold),
                            plan.test_indices(fold));
        score_split(name, repeat, fold, split, cfg,
                    derive_seed(cfg.seed, fnv1a(name) ^ 0x5e1ec7ULL,
                                static_cast<std::uint64_t>(repeat * cfg.folds + fold)),
                    out);
      }
    } catch (const std::exception& e) {
      out.failures.push_back({name, repeat, -1, e.what()});
    }
  }

  EvalReport report = make_report("separability", ds, methods, cfg);
  for (const auto& out : outputs) {
    report.scores.insert(report.scores.end(), out.rows.begin(), out.rows.end());
    report.failures.insert(report.failures.end(), out.failures.begin(),
                           out.failures.end());
  }

  for (const auto& method : methods) {
    MethodAggregate agg;
    agg.method = method.name;
    agg.knn_mean = mean_of(scores_of(report.scores, method.name, "knn"));
    agg.kde_mean = mean_of(scores_of(report.scores, method.name, "kde"));
    agg.mean_bac = mean_of(scores_of(report.scores, method.name, nullptr));
    for (int repeat = 0; repeat < cfg.repeats; ++repeat) {
      std::vector<double> repeat_scores;
      for (const auto& row : report.scores) {
        if (row.method == method.name && row.repeat == repeat) {
          repeat_scores.push_back(row.bac);
        }
      }
      agg.per_repeat_mean.push_back(mean_of(repeat_scores));
    }
    std::vector<double> finite_repeats;
    for (const double value : agg.per_repeat_mean) {
      if (std::isfinite(value)) finite_repeats.push_back(value);
    }
    agg.stddev_bac = sample_stddev(finite_repeats);
    report.aggregates.push_back(std::move(agg));
  }
  return report;
}

EvalReport visual_separability(const LabeledDataset& ds,
                               const std::vector<Method>& methods,
                               const EvalConfig& cfg) {
  return visual_separability(ds, named_fitters(methods, cfg), cfg);
}

std::string to_json_string(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["protocol"] = report.protocol;
  j["dataset"] = {{"fingerprint", report.dataset_fingerprint},
                  {"features", report.d},
                  {"points", report.n}};
  nlohmann::ordered_json config;
  config["k"] = report.config.k;
  config["folds"] = report.config.folds;
  config["inner_folds"] = report.config.inner_folds;
  config["seed"] = report.config.seed;
  config["neighbor_grid"] = report.config.neighbor_grid;
  config["gamma_grid"] = report.config.gamma_grid;
  config["melm_restarts"] = report.config.melm_restarts;
  config["melm_gamma"] = report.config.melm_gamma;
  config["subset_fraction"] = report.config.subset_fraction;
  config["repeats"] = report.config.repeats;
  config["optimizer"] = detail::optim_to_json(report.config.optim);
  j["config"] = std::move(config);
  j["methods"] = report.methods;

  nlohmann::ordered_json scores = nlohmann::ordered_json::array();
  for (const auto& row : report.scores) {
    nlohmann::ordered_json entry;
    entry["method"] = row.method;
    entry["classifier"] = row.classifier;
    if (report.protocol == "separability") entry["repeat"] = row.repeat;
    entry["fold"] = row.fold;
    entry["bac"] = row.bac;
    if (row.classifier == "knn") {
      entry["neighbors"] = row.neighbors;
    } else {
      entry["gamma"] = row.gamma;
    }
    scores.push_back(std::move(entry));
  }
  j["scores"] = std::move(scores);

  nlohmann::ordered_json aggregates = nlohmann::ordered_json::array();
  for (const auto& agg : report.aggregates) {
    nlohmann::ordered_json entry;
    entry["method"] = agg.method;
    entry["mean_bac"] = agg.mean_bac;
    entry["stddev_bac"] = agg.stddev_bac;
    entry["knn_mean"] = agg.knn_mean;
    entry["kde_mean"] = agg.kde_mean;
    if (!agg.best_classifier.empty()) {
      entry["best_classifier"] = agg.best_classifier;
    }
    if (!agg.per_repeat_mean.empty()) {
      entry["per_repeat_mean"] = agg.per_repeat_mean;
    }
    aggregates.push_back(std::move(entry));
  }
  j["aggregates"] = std::move(aggregates);

  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (const auto& failure : report.failures) {
    failures.push_back({{"method", failure.method},
                        {"repeat", failure.repeat},
                        {"fold", failure.fold},
                        {"message", failure.message}});
  }
  j["failures"] = std::move(failures);
  return j.dump(2) + "\n";
}

}  // namespace melm
