#include "melm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>

#include "melm/error.hpp"
#include "melm/rng.hpp"

namespace melm {

namespace {

std::string_view trimmed(std::string_view s) {
  const auto* ws = " \t";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = trimmed(s);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;  // from_chars rejects a leading plus
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

bool parse_index(std::string_view s, long& out) {
  s = trimmed(s);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::size_t begin = 0;
  while (true) {
    const auto pos = line.find(delim, begin);
    if (pos == std::string::npos) {
      cells.emplace_back(line.substr(begin));
      return cells;
    }
    cells.emplace_back(line.substr(begin, pos - begin));
    begin = pos + 1;
  }
}

/// Reads all lines, dropping trailing '\r' so CRLF files parse identically.
/// Returns (1-based line number, content) for nonempty lines.
std::vector<std::pair<long, std::string>> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::pair<long, std::string>> lines;
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trimmed(line).empty()) continue;
    lines.emplace_back(number, line);
  }
  return lines;
}

/// Maps the two distinct label strings onto {-1, +1}: by numeric value when
/// both parse as numbers (so "-1"/"+1" keep their signs), lexicographically
/// otherwise; the smaller value becomes -1.
std::map<std::string, int, std::less<>> label_mapping(
    const std::map<std::string, long>& counts, const std::string& path) {
  if (counts.size() < 2) {
    throw ValidationError(path + ": labels take only one value '" +
                          (counts.empty() ? "" : counts.begin()->first) + "'");
  }
  if (counts.size() > 2) {
    std::string seen;
    for (const auto& [value, count] : counts) {
      if (!seen.empty()) seen += ", ";
      seen += "'" + value + "'";
    }
    throw ValidationError(path + ": expected two label values, found " + seen);
  }
  const std::string& first = counts.begin()->first;
  const std::string& second = std::next(counts.begin())->first;
  double a = 0.0;
  double b = 0.0;
  bool first_is_minus;
  if (parse_double(first, a) && parse_double(second, b) && a != b) {
    first_is_minus = a < b;
  } else {
    first_is_minus = first < second;
  }
  std::map<std::string, int, std::less<>> mapping;
  mapping[first] = first_is_minus ? -1 : 1;
  mapping[second] = first_is_minus ? 1 : -1;
  return mapping;
}

}  // namespace

void LabeledDataset::validate() const {
  if (points.rows() < 1) throw ValidationError("dataset has no features");
  if (points.cols() < 2) throw ValidationError("dataset needs at least two samples");
  if (static_cast<Eigen::Index>(labels.size()) != points.cols()) {
    throw ValidationError("label count does not match the number of samples");
  }
  if (!points.allFinite()) throw ValidationError("dataset has non-finite entries");
  bool has_minus = false;
  bool has_plus = false;
  for (const int label : labels) {
    if (label == -1) {
      has_minus = true;
    } else if (label == 1) {
      has_plus = true;
    } else {
      throw ValidationError("labels must be -1 or +1");
    }
  }
  if (!has_minus || !has_plus) {
    throw ValidationError("dataset must contain both classes");
  }
  if (!feature_names.empty() &&
      static_cast<Eigen::Index>(feature_names.size()) != points.rows()) {
    throw ValidationError("feature name count does not match dimension");
  }
}

Eigen::MatrixXd AffineMap::apply(const Eigen::MatrixXd& pts) const {
  if (pts.rows() != linear.cols()) {
    throw ValidationError("affine map dimension does not match the points");
  }
  return (linear * pts).colwise() + offset;
}

AffineMap AffineMap::inverse() const {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(linear);
  if (!lu.isInvertible()) {
    throw ValidationError("affine map is not invertible");
  }
  Eigen::MatrixXd inv = lu.inverse();
  return AffineMap{inv, -(inv * offset)};
}

std::vector<int> FoldPlan::train_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> FoldPlan::test_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(static_cast<int>(i));
  }
  return out;
}

LabeledDataset load_csv(const std::string& path,
                        const std::string& label_column) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ParseError(path + ": no data rows");

  const auto first_cells = split(lines.front().second, ',');
  const long n_cols = static_cast<long>(first_cells.size());
  if (n_cols < 2) {
    throw ParseError(path + ": need at least one feature column and one label column",
                     lines.front().first);
  }

  // The first row is a header exactly when none of its cells is a number;
  // a data row always has numeric feature cells.
  bool has_header = true;
  for (const auto& cell : first_cells) {
    double ignored;
    if (parse_double(cell, ignored)) {
      has_header = false;
      break;
    }
  }

  long label_idx = n_cols - 1;
  if (!label_column.empty()) {
    bool resolved = false;
    if (has_header) {
      for (long c = 0; c < n_cols; ++c) {
        if (std::string(trimmed(first_cells[c])) == label_column) {
          label_idx = c;
          resolved = true;
          break;
        }
      }
    }
    if (!resolved) {
      long idx = 0;
      if (parse_index(label_column, idx) && idx >= 0 && idx < n_cols) {
        label_idx = idx;
      } else {
        throw ConfigError(path + ": label column '" + label_column +
                          "' is neither a header name nor a valid column index");
      }
    }
  }

  const std::size_t first_data = has_header ? 1 : 0;
  const long n_rows = static_cast<long>(lines.size() - first_data);
  if (n_rows < 1) throw ParseError(path + ": no data rows");
  const long d = n_cols - 1;

  Eigen::MatrixXd points(d, n_rows);
  std::vector<std::string> label_cells(n_rows);
  std::map<std::string, long> label_counts;

  for (long r = 0; r < n_rows; ++r) {
    const auto& [line_no, line] = lines[first_data + r];
    const auto cells = split(line, ',');
    if (static_cast<long>(cells.size()) != n_cols) {
      throw ParseError(path + ": line " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(n_cols),
                       line_no);
    }
    long feature = 0;
    for (long c = 0; c < n_cols; ++c) {
      if (c == label_idx) {
        label_cells[r] = std::string(trimmed(cells[c]));
        ++label_counts[label_cells[r]];
        continue;
      }
      double value = 0.0;
      if (!parse_double(cells[c], value)) {
        throw ParseError(path + ": line " + std::to_string(line_no) + " column " +
                             std::to_string(c + 1) + ": '" + cells[c] +
                             "' is not a number",
                         line_no, c + 1);
      }
      if (!std::isfinite(value)) {
        throw ParseError(path + ": line " + std::to_string(line_no) + " column " +
                             std::to_string(c + 1) + ": non-finite feature value",
                         line_no, c + 1);
      }
      points(feature++, r) = value;
    }
  }

  const auto mapping = label_mapping(label_counts, path);
  LabeledDataset ds;
  ds.points = std::move(points);
  ds.labels.resize(n_rows);
  for (long r = 0; r < n_rows; ++r) ds.labels[r] = mapping.at(label_cells[r]);
  if (has_header) {
    for (long c = 0; c < n_cols; ++c) {
      if (c != label_idx) ds.feature_names.emplace_back(trimmed(first_cells[c]));
    }
  }
  ds.validate();
  return ds;
}

LabeledDataset load_libsvm(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ParseError(path + ": empty file");

  struct SparseRow {
    std::vector<std::pair<long, double>> entries;
  };
  std::vector<SparseRow> rows;
  std::vector<std::string> label_cells;
  std::map<std::string, long> label_counts;
  long d = 0;

  for (const auto& [line_no, line] : lines) {
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;
    label_cells.push_back(token);
    ++label_counts[token];
    SparseRow row;
    long previous = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
        throw ParseError(path + ": line " + std::to_string(line_no) +
                             ": expected index:value, got '" + token + "'",
                         line_no);
      }
      long index = 0;
      if (!parse_index(token.substr(0, colon), index) || index < 1) {
        throw ParseError(path + ": line " + std::to_string(line_no) +
                             ": bad feature index in '" + token + "'",
                         line_no);
      }
      if (index <= previous) {
        throw ParseError(path + ": line " + std::to_string(line_no) +
                             ": feature indices must be strictly ascending (" +
                             std::to_string(index) + " after " +
                             std::to_string(previous) + ")",
                         line_no);
      }
      double value = 0.0;
      if (!parse_double(token.substr(colon + 1), value)) {
        throw ParseError(path + ": line " + std::to_string(line_no) +
                             ": bad feature value in '" + token + "'",
                         line_no);
      }
      if (!std::isfinite(value)) {
        throw ParseError(path + ": line " + std::to_string(line_no) +
                             ": non-finite feature value in '" + token + "'",
                         line_no);
      }
      previous = index;
      row.entries.emplace_back(index, value);
    }
    d = std::max(d, previous);
    rows.push_back(std::move(row));
  }

  if (d < 1) throw ParseError(path + ": no feature entries in the whole file");

  const long n = static_cast<long>(rows.size());
  Eigen::MatrixXd points = Eigen::MatrixXd::Zero(d, n);
  for (long c = 0; c < n; ++c) {
    for (const auto& [index, value] : rows[c].entries) {
      points(index - 1, c) = value;
    }
  }

  const auto mapping = label_mapping(label_counts, path);
  LabeledDataset ds;
  ds.points = std::move(points);
  ds.labels.resize(n);
  for (long c = 0; c < n; ++c) ds.labels[c] = mapping.at(label_cells[c]);
  ds.validate();
  return ds;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> class_partition(
    const LabeledDataset& ds) {
  ds.validate();
  const long n = ds.n();
  long n_minus = 0;
  for (const int label : ds.labels) n_minus += label == -1 ? 1 : 0;
  Eigen::MatrixXd x_minus(ds.d(), n_minus);
  Eigen::MatrixXd x_plus(ds.d(), n - n_minus);
  long at_minus = 0;
  long at_plus = 0;
  for (long i = 0; i < n; ++i) {
    if (ds.labels[i] == -1) {
      x_minus.col(at_minus++) = ds.points.col(i);
    } else {
      x_plus.col(at_plus++) = ds.points.col(i);
    }
  }
  return {std::move(x_minus), std::move(x_plus)};
}

std::pair<LabeledDataset, AffineMap> standardize(const LabeledDataset& ds) {
  ds.validate();
  const long d = ds.d();
  const long n = ds.n();
  const Eigen::VectorXd mean = ds.points.rowwise().mean();
  Eigen::VectorXd scale(d);
  for (long r = 0; r < d; ++r) {
    const double ss = (ds.points.row(r).array() - mean(r)).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    // Features without spread keep scale 1 so the map stays invertible.
    scale(r) = sd > 1e-12 * (1.0 + std::abs(mean(r))) ? sd : 1.0;
  }
  AffineMap map;
  map.linear = scale.cwiseInverse().asDiagonal();
  map.offset = -mean.cwiseQuotient(scale);
  LabeledDataset out = ds;
  out.points = map.apply(ds.points);
  return {std::move(out), std::move(map)};
}

FoldPlan split_kfold(const LabeledDataset& ds, int folds, std::uint64_t seed) {
  ds.validate();
  if (folds < 2) throw ConfigError("fold count must be at least 2");
  std::vector<int> minus_idx;
  std::vector<int> plus_idx;
  for (int i = 0; i < ds.n(); ++i) {
    (ds.labels[i] == -1 ? minus_idx : plus_idx).push_back(i);
  }
  for (const auto* cls : {&minus_idx, &plus_idx}) {
    if (static_cast<int>(cls->size()) < folds) {
      throw ValidationError("a class has fewer samples (" +
                            std::to_string(cls->size()) + ") than folds (" +
                            std::to_string(folds) + ")");
    }
  }
  Rng rng(seed);
  rng.shuffle(minus_idx);
  rng.shuffle(plus_idx);
  FoldPlan plan;
  plan.fold_count = folds;
  plan.assignments.assign(ds.n(), 0);
  // Round-robin within each shuffled class keeps every fold's class ratio
  // within one sample of the global ratio.
  for (std::size_t i = 0; i < minus_idx.size(); ++i) {
    plan.assignments[minus_idx[i]] = static_cast<int>(i % folds);
  }
  for (std::size_t i = 0; i < plus_idx.size(); ++i) {
    plan.assignments[plus_idx[i]] = static_cast<int>(i % folds);
  }
  return plan;
}

LabeledDataset take_columns(const LabeledDataset& ds,
                            const std::vector<int>& indices) {
  LabeledDataset out;
  out.points.resize(ds.d(), static_cast<long>(indices.size()));
  out.labels.resize(indices.size());
  out.feature_names = ds.feature_names;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    if (idx < 0 || idx >= ds.n()) {
      throw ValidationError("sample index " + std::to_string(idx) +
                            " out of range");
    }
    out.points.col(static_cast<long>(i)) = ds.points.col(idx);
    out.labels[i] = ds.labels[idx];
  }
  return out;
}

std::string dataset_fingerprint(const LabeledDataset& ds) {
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a offset basis
  const auto mix = [&hash](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash ^= bytes[i];
      hash *= 1099511628211ULL;
    }
  };
  const std::int64_t d = ds.d();
  const std::int64_t n = ds.n();
  mix(&d, sizeof d);
  mix(&n, sizeof n);
  mix(ds.points.data(), sizeof(double) * static_cast<std::size_t>(d * n));
  for (const int label : ds.labels) {
    const std::int32_t value = label;
    mix(&value, sizeof value);
  }
  for (const auto& name : ds.feature_names) {
    mix(name.data(), name.size());
    mix("\0", 1);
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx",
                static_cast<unsigned long long>(hash));
  return out;
}

}  // namespace melm
