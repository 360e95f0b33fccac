#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "melm/optimizer.hpp"

namespace melm {

/// On-disk model artifact. Round-trips byte-stable: saving a loaded file
/// reproduces it exactly.
struct ModelFile {
  int schema_version = 1;
  int d = 0;
  int k = 0;
  double gamma = 1.0;
  Eigen::MatrixXd v;  // d x k, stored row-major
  double dcs = 0.0;
  int restarts = 0;
  std::uint64_t seed = 0;
  OptimConfig optim;  // echo of the settings that produced v
  std::string dataset_fingerprint;
};

ModelFile model_from_fit(const MelmModel& model, const OptimConfig& optim);

/// Writes atomically (temp file + rename in the target directory).
void save_model(const ModelFile& model, const std::string& path);

/// Validates on load: dims consistent, entries finite, and the stored V
/// orthonormal to within ||V^T V - I||^2 <= 1e-8.
ModelFile load_model(const std::string& path);

std::string to_json_string(const ModelFile& model);
ModelFile model_from_json_string(const std::string& text);

/// Atomic text-file write used for every artifact the toolkit produces.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace melm
