#include "melm/model_io.hpp"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "melm/error.hpp"
#include "serialize.hpp"

namespace melm {

namespace detail {

nlohmann::ordered_json optim_to_json(const OptimConfig& cfg) {
  nlohmann::ordered_json j;
  j["max_iters"] = cfg.max_iters;
  j["grad_tol"] = cfg.grad_tol;
  j["step_tol"] = cfg.step_tol;
  j["memory"] = cfg.memory;
  j["penalty_weight"] = cfg.penalty_weight;
  j["ls_sufficient"] = cfg.ls_sufficient;
  j["ls_shrink"] = cfg.ls_shrink;
  j["ls_max_steps"] = cfg.ls_max_steps;
  return j;
}

OptimConfig optim_from_json(const nlohmann::json& j) {
  OptimConfig cfg;
  cfg.max_iters = j.at("max_iters").get<int>();
  cfg.grad_tol = j.at("grad_tol").get<double>();
  cfg.step_tol = j.at("step_tol").get<double>();
  cfg.memory = j.at("memory").get<int>();
  cfg.penalty_weight = j.at("penalty_weight").get<double>();
  cfg.ls_sufficient = j.at("ls_sufficient").get<double>();
  cfg.ls_shrink = j.at("ls_shrink").get<double>();
  cfg.ls_max_steps = j.at("ls_max_steps").get<int>();
  return cfg;
}

}  // namespace detail

namespace {

void check_model(const ModelFile& model, const char* origin) {
  const std::string prefix = std::string(origin) + ": ";
  if (model.schema_version != 1) {
    throw ValidationError(prefix + "unsupported schema version " +
                          std::to_string(model.schema_version));
  }
  if (model.d < 1 || model.k < 1 || model.k > model.d) {
    throw ValidationError(prefix + "dimensions must satisfy 1 <= k <= d");
  }
  if (model.v.rows() != model.d || model.v.cols() != model.k) {
    throw ValidationError(prefix + "projection shape does not match d and k");
  }
  if (!model.v.allFinite() || !std::isfinite(model.gamma) ||
      !std::isfinite(model.dcs)) {
    throw ValidationError(prefix + "model contains non-finite values");
  }
  if (!(model.gamma > 0.0)) {
    throw ValidationError(prefix + "gamma must be positive");
  }
  const Eigen::MatrixXd gram = model.v.transpose() * model.v;
  const double drift =
      (gram - Eigen::MatrixXd::Identity(model.k, model.k)).squaredNorm();
  if (drift > 1e-8) {
    std::ostringstream msg;
    msg << prefix << "stored projection is not orthonormal (||V^T V - I||^2 = "
        << drift << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

ModelFile model_from_fit(const MelmModel& model, const OptimConfig& optim) {
  ModelFile out;
  out.d = model.d;
  out.k = model.k;
  out.gamma = model.gamma;
  out.v = model.v.v;
  out.dcs = model.dcs_achieved;
  out.restarts = model.restarts;
  out.seed = model.seed;
  out.optim = optim;
  out.dataset_fingerprint = model.dataset_fingerprint;
  return out;
}

std::string to_json_string(const ModelFile& model) {
  nlohmann::ordered_json j;
  j["schema_version"] = model.schema_version;
  j["d"] = model.d;
  j["k"] = model.k;
  j["gamma"] = model.gamma;
  nlohmann::ordered_json v = nlohmann::ordered_json::array();
  for (int r = 0; r < model.d; ++r) {
    for (int c = 0; c < model.k; ++c) v.push_back(model.v(r, c));
  }
  j["v"] = std::move(v);
  j["dcs"] = model.dcs;
  j["restarts"] = model.restarts;
  j["seed"] = model.seed;
  j["optimizer"] = detail::optim_to_json(model.optim);
  j["dataset_fingerprint"] = model.dataset_fingerprint;
  // The serializer emits shortest round-trip decimals, so save/load/save
  // reproduces the file byte for byte.
  return j.dump(2) + "\n";
}

ModelFile model_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  ModelFile model;
  try {
    model.schema_version = j.at("schema_version").get<int>();
    model.d = j.at("d").get<int>();
    model.k = j.at("k").get<int>();
    model.gamma = j.at("gamma").get<double>();
    if (model.d < 1 || model.k < 1) {
      throw ValidationError("model file: dimensions must be positive");
    }
    const auto& v = j.at("v");
    if (!v.is_array() ||
        v.size() != static_cast<std::size_t>(model.d) *
                        static_cast<std::size_t>(model.k)) {
      throw ParseError("model file: the projection array must hold d*k "
                       "entries in row-major order");
    }
    model.v.resize(model.d, model.k);
    std::size_t at = 0;
    for (int r = 0; r < model.d; ++r) {
      for (int c = 0; c < model.k; ++c, ++at) {
        model.v(r, c) = v[at].get<double>();
      }
    }
    model.dcs = j.at("dcs").get<double>();
    model.restarts = j.at("restarts").get<int>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.optim = detail::optim_from_json(j.at("optimizer"));
    model.dataset_fingerprint =
        j.at("dataset_fingerprint").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  check_model(model, "model file");
  return model;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir =
      target.has_parent_path() ? target.parent_path() : fs::path(".");
  const fs::path temp =
      dir / (target.filename().string() + ".tmp." +
             std::to_string(static_cast<unsigned long>(::getpid())));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open '" + temp.string() + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(temp, ec);
      throw IoError("write to '" + temp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    std::error_code cleanup;
    fs::remove(temp, cleanup);
    throw IoError("cannot move '" + temp.string() + "' to '" + path +
                  "': " + ec.message());
  }
}

void save_model(const ModelFile& model, const std::string& path) {
  check_model(model, "model");
  write_file_atomic(path, to_json_string(model));
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read from '" + path + "' failed");
  return model_from_json_string(buffer.str());
}

}  // namespace melm
