#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace melm {

/// Binary-labeled point cloud. Columns of `points` are samples, so points is
/// d x N with unit stride down each sample. Labels are -1/+1 and both occur
/// at least once in a valid dataset.
struct LabeledDataset {
  Eigen::MatrixXd points;
  std::vector<int> labels;
  std::vector<std::string> feature_names;  // empty or size d

  int d() const { return static_cast<int>(points.rows()); }
  int n() const { return static_cast<int>(points.cols()); }

  /// Throws ValidationError on NaN/Inf entries, label/point count mismatch,
  /// labels outside {-1,+1}, or a missing class.
  void validate() const;
};

/// Invertible affine transform y = linear * x + offset.
struct AffineMap {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& pts) const;
  AffineMap inverse() const;
};

/// Stratified fold assignment: every index appears exactly once and each
/// fold's class ratio is within one sample of the global ratio.
struct FoldPlan {
  int fold_count = 0;
  std::vector<int> assignments;

  std::vector<int> train_indices(int fold) const;
  std::vector<int> test_indices(int fold) const;
};

/// Loads a comma-separated file. The first row is treated as a header when
/// none of its cells parses as a number. `label_column` may be a header name,
/// a 0-based column index, or "" for the last column. The two label values
/// map to {-1,+1} by value order (numeric when both parse as numbers,
/// lexicographic otherwise; smaller becomes -1).
LabeledDataset load_csv(const std::string& path,
                        const std::string& label_column = "");

/// Loads `<label> <idx>:<val> ...` lines with 1-based strictly ascending
/// indices per line; absent indices are zero and d is the largest index seen.
LabeledDataset load_libsvm(const std::string& path);

/// Splits columns by label, preserving dataset order. Returns (X_minus,
/// X_plus).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> class_partition(
    const LabeledDataset& ds);

/// Per-feature shift to mean 0 and scale to unit standard deviation
/// (unbiased, divisor N-1). Constant features keep scale 1 so the returned
/// map stays invertible.
std::pair<LabeledDataset, AffineMap> standardize(const LabeledDataset& ds);

/// Deterministic stratified k-fold assignment. Throws when a class has fewer
/// samples than `folds`.
FoldPlan split_kfold(const LabeledDataset& ds, int folds, std::uint64_t seed);

/// Dataset restricted to the given sample indices, in the given order.
LabeledDataset take_columns(const LabeledDataset& ds,
                            const std::vector<int>& indices);

/// Content hash (FNV-1a over dims, point bytes, labels) as a fixed-width hex
/// string; used to detect model/data mismatches.
std::string dataset_fingerprint(const LabeledDataset& ds);

}  // namespace melm
