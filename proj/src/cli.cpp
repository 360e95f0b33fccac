#include "melm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "melm/baselines.hpp"
#include "melm/dataset.hpp"
#include "melm/density.hpp"
#include "melm/error.hpp"
#include "melm/eval.hpp"
#include "melm/model_io.hpp"
#include "melm/objective.hpp"
#include "melm/optimizer.hpp"
#include "melm/projection.hpp"
#include "melm/rng.hpp"
#include "melm/runtime.hpp"

namespace melm {

namespace {

/// Prefixes library errors with the pipeline stage that raised them, so a
/// failing run names where it died. Configuration errors keep their type:
/// they exit as usage errors.
template <typename Fn>
auto at_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(stage) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(std::string(stage) + ": " + e.what());
  }
}

/// Shortest decimal that parses back to the same double.
std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

struct DataArgs {
  std::string path;
  std::string format = "csv";
  std::string label_column;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.path, "input dataset file")
      ->required();
  cmd->add_option("--format", args.format, "input format (default: csv)")
      ->check(CLI::IsMember({"csv", "libsvm"}));
  cmd->add_option("--label-col", args.label_column,
                  "csv label column: header name or 0-based index "
                  "(default: last column)");
}

LabeledDataset load_data(const DataArgs& args) {
  return at_stage("load-data", [&] {
    return args.format == "libsvm" ? load_libsvm(args.path)
                                   : load_csv(args.path, args.label_column);
  });
}

std::string projection_csv(const Eigen::MatrixXd& projected,
                           const std::vector<int>& labels) {
  std::ostringstream out;
  for (long c = 0; c < projected.rows(); ++c) {
    out << 'x' << c + 1 << ',';
  }
  out << "label\n";
  for (long i = 0; i < projected.cols(); ++i) {
    for (long c = 0; c < projected.rows(); ++c) {
      out << format_double(projected(c, i)) << ',';
    }
    out << labels[static_cast<std::size_t>(i)] << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  DataArgs data;
  int k = 0;
  double gamma = 1.0;
  bool gamma_grid = false;
  int restarts = 16;
  std::uint64_t seed = 0;
  int max_iters = 500;
  double tol = 1e-6;
  std::string out;
};

/// Scores every candidate bandwidth scale with the separability protocol
/// (3 folds, 1 repeat) and keeps the best; ties go to the earlier entry.
double select_gamma(const LabeledDataset& ds, const FitArgs& args) {
  const std::vector<double> grid = {0.25, 0.5, 1.0, 1.5, 2.0};
  double best_gamma = 1.0;
  double best_score = -1.0;
  for (const double gamma : grid) {
    EvalConfig cfg;
    cfg.k = args.k;
    cfg.folds = 3;
    cfg.repeats = 1;
    cfg.seed = args.seed;
    cfg.melm_restarts = args.restarts;
    cfg.melm_gamma = gamma;
    cfg.optim.max_iters = args.max_iters;
    cfg.optim.grad_tol = args.tol;
    const EvalReport report =
        visual_separability(ds, std::vector<Method>{Method::Melm}, cfg);
    const double score = report.aggregates.at(0).mean_bac;
    std::printf("  gamma %-5g separability %s\n", gamma,
                std::isfinite(score) ? format_double(score).c_str() : "failed");
    if (std::isfinite(score) && score > best_score) {
      best_score = score;
      best_gamma = gamma;
    }
  }
  if (best_score < 0.0) {
    throw Error("no bandwidth scale in the grid produced a usable fit");
  }
  return best_gamma;
}

int cmd_fit(const FitArgs& args) {
  const LabeledDataset ds = load_data(args.data);
  double gamma = args.gamma;
  if (args.gamma_grid) {
    std::printf("selecting gamma on a 3-fold separability score:\n");
    gamma = at_stage("select-gamma", [&] { return select_gamma(ds, args); });
    std::printf("selected gamma %g\n", gamma);
  }

  OptimConfig optim;
  optim.max_iters = args.max_iters;
  optim.grad_tol = args.tol;
  optim.seed = args.seed;

  MelmModel model = at_stage("fit", [&] {
    auto [x_minus, x_plus] = class_partition(ds);
    const ObjectiveWorkspace objective(x_plus, x_minus, args.k,
                                       BandwidthConfig{gamma});
    return multistart(objective, args.restarts, optim).first;
  });
  model.dataset_fingerprint = dataset_fingerprint(ds);

  at_stage("save-model",
           [&] { save_model(model_from_fit(model, optim), args.out); });
  std::printf("fit: d=%d k=%d gamma=%g restarts=%d dcs=%s -> %s\n", model.d,
              model.k, gamma, args.restarts,
              format_double(model.dcs_achieved).c_str(), args.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// transform

struct TransformArgs {
  std::string model;
  DataArgs data;
  std::string out;
};

int cmd_transform(const TransformArgs& args) {
  const ModelFile model =
      at_stage("load-model", [&] { return load_model(args.model); });
  const LabeledDataset ds = load_data(args.data);
  if (ds.d() != model.d) {
    throw Error("transform: the data has " + std::to_string(ds.d()) +
                " features but the model expects " + std::to_string(model.d));
  }
  if (dataset_fingerprint(ds) != model.dataset_fingerprint) {
    std::fprintf(stderr,
                 "warning: the dataset differs from the one the model was "
                 "fitted on (fingerprint mismatch)\n");
  }
  const Eigen::MatrixXd projected = model.v.transpose() * ds.points;
  at_stage("write-output", [&] {
    write_file_atomic(args.out, projection_csv(projected, ds.labels));
  });
  std::printf("transform: %d points -> %s\n", ds.n(), args.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  DataArgs data;
  std::string protocol;
  std::string methods = "melm,pca,cpca,2epca,ppca,identity";
  int k = 2;
  int folds = 5;
  std::uint64_t seed = 0;
  int restarts = 16;
  double gamma = 1.0;
  double subset_fraction = 1.0;
  int repeats = 5;
  std::string out;
};

int cmd_eval(const EvalArgs& args) {
  const LabeledDataset ds = load_data(args.data);
  const std::vector<Method> methods = parse_method_list(args.methods);

  EvalConfig cfg;
  cfg.k = args.k;
  cfg.folds = args.folds;
  cfg.seed = args.seed;
  cfg.melm_restarts = args.restarts;
  cfg.melm_gamma = args.gamma;
  cfg.subset_fraction = args.subset_fraction;
  cfg.repeats = args.repeats;

  const EvalReport report = at_stage("evaluate", [&] {
    return args.protocol == "pipeline"
               ? pipeline_benchmark(ds, methods, cfg)
               : visual_separability(ds, methods, cfg);
  });

  at_stage("write-report",
           [&] { write_file_atomic(args.out, to_json_string(report)); });

  std::printf("%-10s %-9s %-9s %-9s %-9s\n", "method", "mean", "stddev", "knn",
              "kde");
  for (const auto& agg : report.aggregates) {
    std::printf("%-10s %-9.4f %-9.4f %-9.4f %-9.4f\n", agg.method.c_str(),
                agg.mean_bac, agg.stddev_bac, agg.knn_mean, agg.kde_mean);
  }
  if (!report.failures.empty()) {
    std::fprintf(stderr, "warning: %zu evaluation task(s) failed; see the "
                 "failures array in %s\n",
                 report.failures.size(), args.out.c_str());
  }
  std::printf("report -> %s\n", args.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// restarts

struct RestartsArgs {
  DataArgs data;
  int k = 0;
  int n = 500;
  std::uint64_t seed = 0;
  double gamma = 1.0;
  int curve = 0;  // 0: no curve appended
  std::string out;
};

int cmd_restarts(const RestartsArgs& args) {
  const LabeledDataset ds = load_data(args.data);
  const RestartTrace trace = at_stage("restarts", [&] {
    auto [x_minus, x_plus] = class_partition(ds);
    const ObjectiveWorkspace objective(x_plus, x_minus, args.k,
                                       BandwidthConfig{args.gamma});
    OptimConfig cfg;
    cfg.seed = args.seed;
    return multistart(objective, args.n, cfg).second;
  });

  std::ostringstream out;
  for (const double dcs : trace.dcs) out << format_double(dcs) << '\n';
  if (args.curve > 0) {
    std::vector<double> finite;
    for (const double dcs : trace.dcs) {
      if (std::isfinite(dcs)) finite.push_back(dcs);
    }
    const std::vector<double> curve = at_stage("restarts", [&] {
      return expected_max_curve(
          finite, std::min<int>(args.curve, static_cast<int>(finite.size())));
    });
    out << "s,expected_max\n";
    for (std::size_t s = 0; s < curve.size(); ++s) {
      out << s + 1 << ',' << format_double(curve[s]) << '\n';
    }
  }
  at_stage("write-output", [&] { write_file_atomic(args.out, out.str()); });
  std::printf("restarts: best dcs %s at restart %d -> %s\n",
              format_double(trace.dcs[static_cast<std::size_t>(
                  trace.best_index)]).c_str(),
              trace.best_index, args.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  DataArgs data;
  int k = 0;
  int trials = 20;
  std::uint64_t seed = 0;
  double gamma = 1.0;
};

int cmd_gradcheck(const GradcheckArgs& args) {
  const LabeledDataset ds = load_data(args.data);
  const double worst = at_stage("gradcheck", [&] {
    auto [x_minus, x_plus] = class_partition(ds);
    const ObjectiveWorkspace objective(x_plus, x_minus, args.k,
                                       BandwidthConfig{args.gamma});
    Rng rng(args.seed);
    double max_rel_err = 0.0;
    for (int trial = 0; trial < args.trials; ++trial) {
      // Odd trials perturb off the manifold: the gradient must be exact
      // wherever the line search can land, not only at orthonormal points.
      Eigen::MatrixXd v = random_orthonormal(ds.d(), args.k, rng).v;
      if (trial % 2 == 1) {
        for (long c = 0; c < v.cols(); ++c) {
          for (long r = 0; r < v.rows(); ++r) v(r, c) += 0.1 * rng.normal();
        }
      }
      const Eigen::MatrixXd grad =
          objective.melm_gradient(ProjectionMatrix(v));
      for (long c = 0; c < v.cols(); ++c) {
        for (long r = 0; r < v.rows(); ++r) {
          const double h = 1e-5 * (1.0 + std::abs(v(r, c)));
          Eigen::MatrixXd shifted = v;
          shifted(r, c) = v(r, c) + h;
          const double up =
              objective.melm_value(ProjectionMatrix(shifted)).melm;
          shifted(r, c) = v(r, c) - h;
          const double down =
              objective.melm_value(ProjectionMatrix(shifted)).melm;
          const double fd = (up - down) / (2.0 * h);
          const double rel =
              std::abs(grad(r, c) - fd) / (1.0 + std::abs(fd));
          max_rel_err = std::max(max_rel_err, rel);
        }
      }
    }
    return max_rel_err;
  });
  std::printf("gradcheck: max relative error %s over %d trials\n",
              format_double(worst).c_str(), args.trials);
  if (!(worst <= 1e-4)) {
    std::fprintf(stderr, "gradcheck: analytic gradient disagrees with finite "
                 "differences\n");
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// plotdata

struct PlotdataArgs {
  std::string model;
  DataArgs data;
  int grid = 200;
  std::string out;
};

std::string density_raster_csv(const KdeModel& model,
                               const Eigen::VectorXd& xs,
                               const Eigen::VectorXd& ys) {
  std::ostringstream out;
  Eigen::VectorXd point(2);
  for (long row = 0; row < ys.size(); ++row) {
    for (long col = 0; col < xs.size(); ++col) {
      point << xs(col), ys(row);
      if (col > 0) out << ',';
      out << format_double(std::exp(kde_log_density_at(model, point)));
    }
    out << '\n';
  }
  return out.str();
}

std::string density_curve_csv(const KdeModel& model,
                              const Eigen::VectorXd& xs) {
  std::ostringstream out;
  out << "x,density\n";
  Eigen::VectorXd point(1);
  for (long i = 0; i < xs.size(); ++i) {
    point << xs(i);
    out << format_double(xs(i)) << ','
        << format_double(std::exp(kde_log_density_at(model, point))) << '\n';
  }
  return out.str();
}

Eigen::VectorXd padded_linspace(double lo, double hi, int count) {
  const double pad = 0.05 * std::max(hi - lo, 1e-12);
  return Eigen::VectorXd::LinSpaced(count, lo - pad, hi + pad);
}

int cmd_plotdata(const PlotdataArgs& args) {
  const ModelFile model =
      at_stage("load-model", [&] { return load_model(args.model); });
  const LabeledDataset ds = load_data(args.data);
  if (ds.d() != model.d) {
    throw Error("plot-data: the data has " + std::to_string(ds.d()) +
                " features but the model expects " + std::to_string(model.d));
  }
  if (model.k > 2) {
    throw Error("plot-data: density rasters are defined for k <= 2, the "
                "model has k = " + std::to_string(model.k));
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) {
    throw Error("plot-data: cannot create '" + args.out +
                "': " + ec.message());
  }
  const fs::path dir(args.out);

  const Eigen::MatrixXd projected = model.v.transpose() * ds.points;
  at_stage("write-output", [&] {
    write_file_atomic((dir / "projected.csv").string(),
                      projection_csv(projected, ds.labels));
  });

  long n_minus = 0;
  for (const int label : ds.labels) n_minus += label == -1 ? 1 : 0;
  Eigen::MatrixXd minus(model.k, n_minus);
  Eigen::MatrixXd plus(model.k, ds.n() - n_minus);
  long at_minus = 0;
  long at_plus = 0;
  for (int i = 0; i < ds.n(); ++i) {
    if (ds.labels[static_cast<std::size_t>(i)] == -1) {
      minus.col(at_minus++) = projected.col(i);
    } else {
      plus.col(at_plus++) = projected.col(i);
    }
  }
  const auto [kde_minus, kde_plus] = at_stage("plot-data", [&] {
    return std::make_pair(fit_kde(minus, BandwidthConfig{model.gamma}),
                          fit_kde(plus, BandwidthConfig{model.gamma}));
  });

  at_stage("write-output", [&] {
    if (model.k == 2) {
      const Eigen::VectorXd xs = padded_linspace(
          projected.row(0).minCoeff(), projected.row(0).maxCoeff(), args.grid);
      const Eigen::VectorXd ys = padded_linspace(
          projected.row(1).minCoeff(), projected.row(1).maxCoeff(), args.grid);
      std::ostringstream axes;
      for (long i = 0; i < xs.size(); ++i) {
        axes << (i ? "," : "") << format_double(xs(i));
      }
      axes << '\n';
      for (long i = 0; i < ys.size(); ++i) {
        axes << (i ? "," : "") << format_double(ys(i));
      }
      axes << '\n';
      write_file_atomic((dir / "axes.csv").string(), axes.str());
      write_file_atomic((dir / "density_minus.csv").string(),
                        density_raster_csv(kde_minus, xs, ys));
      write_file_atomic((dir / "density_plus.csv").string(),
                        density_raster_csv(kde_plus, xs, ys));
    } else {
      const Eigen::VectorXd xs = padded_linspace(
          projected.row(0).minCoeff(), projected.row(0).maxCoeff(), args.grid);
      write_file_atomic((dir / "density_minus.csv").string(),
                        density_curve_csv(kde_minus, xs));
      write_file_atomic((dir / "density_plus.csv").string(),
                        density_curve_csv(kde_plus, xs));
    }
  });
  std::printf("plotdata: projected.csv and density grids -> %s\n",
              args.out.c_str());
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Supervised linear dimensionality reduction by maximizing the "
               "Cauchy-Schwarz divergence between projected class densities"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "cap the number of worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  FitArgs fit;
  CLI::App* cmd_fit_app = app.add_subcommand(
      "fit", "fit a projection by penalized multistart ascent");
  add_data_options(cmd_fit_app, fit.data);
  cmd_fit_app->add_option("--k", fit.k, "target dimension")->required();
  CLI::Option* gamma_opt = cmd_fit_app->add_option(
      "--gamma", fit.gamma, "bandwidth scale (default: 1.0)");
  cmd_fit_app
      ->add_flag("--gamma-grid", fit.gamma_grid,
                 "pick gamma from {0.25,0.5,1,1.5,2} by cross-validated "
                 "separability")
      ->excludes(gamma_opt);
  cmd_fit_app->add_option("--restarts", fit.restarts,
                          "number of random restarts (default: 16)");
  cmd_fit_app->add_option("--seed", fit.seed, "random seed (default: 0)");
  cmd_fit_app->add_option("--max-iters", fit.max_iters,
                          "iteration cap per restart (default: 500)");
  cmd_fit_app->add_option("--tol", fit.tol,
                          "gradient max-norm stopping tolerance "
                          "(default: 1e-6)");
  cmd_fit_app->add_option("--out", fit.out, "output model file")->required();

  TransformArgs transform;
  CLI::App* cmd_transform_app = app.add_subcommand(
      "transform", "project a dataset with a fitted model");
  cmd_transform_app->add_option("--model", transform.model, "model file")
      ->required();
  add_data_options(cmd_transform_app, transform.data);
  cmd_transform_app->add_option("--out", transform.out, "output csv")
      ->required();

  EvalArgs eval;
  CLI::App* cmd_eval_app = app.add_subcommand(
      "eval", "benchmark projection methods with cross-validated classifiers");
  add_data_options(cmd_eval_app, eval.data);
  cmd_eval_app
      ->add_option("--protocol", eval.protocol,
                   "pipeline (per-fold refit) or separability (fit once per "
                   "repeat)")
      ->required()
      ->check(CLI::IsMember({"pipeline", "separability"}));
  cmd_eval_app->add_option("--methods", eval.methods,
                           "comma-separated subset of "
                           "melm,pca,cpca,2epca,ppca,identity");
  cmd_eval_app->add_option("--k", eval.k, "target dimension (default: 2)");
  cmd_eval_app->add_option("--folds", eval.folds,
                           "outer fold count (default: 5)");
  cmd_eval_app->add_option("--seed", eval.seed, "random seed (default: 0)");
  cmd_eval_app->add_option("--restarts", eval.restarts,
                           "restarts per projection fit (default: 16)");
  cmd_eval_app->add_option("--gamma", eval.gamma,
                           "bandwidth scale for projection fits "
                           "(default: 1.0)");
  cmd_eval_app->add_option("--subset-fraction", eval.subset_fraction,
                           "separability: per-repeat stratified sample share "
                           "(default: 1.0)");
  cmd_eval_app->add_option("--repeats", eval.repeats,
                           "separability: repetition count (default: 5)");
  cmd_eval_app->add_option("--out", eval.out, "output report json")
      ->required();

  RestartsArgs restarts;
  CLI::App* cmd_restarts_app = app.add_subcommand(
      "restarts", "record the final divergence of many independent restarts");
  add_data_options(cmd_restarts_app, restarts.data);
  cmd_restarts_app->add_option("--k", restarts.k, "target dimension")
      ->required();
  cmd_restarts_app->add_option("--n", restarts.n,
                               "restart count (default: 500)");
  cmd_restarts_app->add_option("--seed", restarts.seed,
                               "random seed (default: 0)");
  cmd_restarts_app->add_option("--gamma", restarts.gamma,
                               "bandwidth scale (default: 1.0)");
  cmd_restarts_app->add_option(
      "--curve", restarts.curve,
      "append E[best of s restarts] for s = 1..S to the trace");
  cmd_restarts_app->add_option("--out", restarts.out, "output csv")
      ->required();

  GradcheckArgs gradcheck;
  CLI::App* cmd_gradcheck_app = app.add_subcommand(
      "gradcheck",
      "compare the analytic gradient against central finite differences");
  add_data_options(cmd_gradcheck_app, gradcheck.data);
  cmd_gradcheck_app->add_option("--k", gradcheck.k, "target dimension")
      ->required();
  cmd_gradcheck_app->add_option("--trials", gradcheck.trials,
                                "number of random projections (default: 20)");
  cmd_gradcheck_app->add_option("--seed", gradcheck.seed,
                                "random seed (default: 0)");
  cmd_gradcheck_app->add_option("--gamma", gradcheck.gamma,
                                "bandwidth scale (default: 1.0)");

  PlotdataArgs plotdata;
  CLI::App* cmd_plotdata_app = app.add_subcommand(
      "plotdata", "write projected points and density grids for plotting");
  cmd_plotdata_app->add_option("--model", plotdata.model, "model file")
      ->required();
  add_data_options(cmd_plotdata_app, plotdata.data);
  cmd_plotdata_app->add_option("--grid", plotdata.grid,
                               "grid resolution per axis (default: 200)");
  cmd_plotdata_app->add_option("--out", plotdata.out, "output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends: text on stdout, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nRun with --help for usage.\n";
    return 2;
  }

  try {
    set_max_threads(threads);
    if (cmd_fit_app->parsed()) return cmd_fit(fit);
    if (cmd_transform_app->parsed()) return cmd_transform(transform);
    if (cmd_eval_app->parsed()) return cmd_eval(eval);
    if (cmd_restarts_app->parsed()) return cmd_restarts(restarts);
    if (cmd_gradcheck_app->parsed()) return cmd_gradcheck(gradcheck);
    if (cmd_plotdata_app->parsed()) return cmd_plotdata(plotdata);
  } catch (const ConfigError& e) {
    // Invalid values that CLI11 cannot check itself (method lists, k vs d,
    // grid bounds) are usage errors, same as unknown flags.
    std::cerr << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "melm: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("melm");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace melm
