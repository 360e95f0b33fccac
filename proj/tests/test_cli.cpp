#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "melm/cli.hpp"
#include "melm/dataset.hpp"
#include "melm/model_io.hpp"
#include "melm/rng.hpp"
#include "testutil.hpp"

namespace {

/// Two linearly separable 2-D blobs, 12 points each, written as csv.
std::string write_blob_csv(const testutil::TempDir& dir,
                           const std::string& name) {
  melm::Rng rng(2024);
  std::ostringstream out;
  out << "x1,x2,label\n";
  for (int cls = 0; cls < 2; ++cls) {
    const double cx = cls == 0 ? -2.0 : 2.0;
    for (int i = 0; i < 12; ++i) {
      out << cx + 0.4 * rng.normal() << ',' << 0.4 * rng.normal() << ','
          << (cls == 0 ? -1 : 1) << '\n';
    }
  }
  return testutil::write_text(dir.file(name), out.str());
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (const char c : text) lines += c == '\n' ? 1 : 0;
  return lines;
}

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  CHECK(melm::run_cli({}) == 2);                     // missing subcommand
  CHECK(melm::run_cli({"frobnicate"}) == 2);         // unknown subcommand
  CHECK(melm::run_cli({"fit"}) == 2);                // missing required flags
  CHECK(melm::run_cli({"fit", "--no-such-flag"}) == 2);
  CHECK(melm::run_cli({"--help"}) == 0);
  CHECK(melm::run_cli({"fit", "--help"}) == 0);

  const testutil::TempDir dir;
  const auto csv = write_blob_csv(dir, "data.csv");
  // --gamma and --gamma-grid are mutually exclusive.
  CHECK(melm::run_cli({"fit", "--data", csv, "--k", "1", "--gamma", "0.5",
                       "--gamma-grid", "--out", dir.file("m.json")}) == 2);
  // k larger than the data dimension is a usage error, not a crash.
  CHECK(melm::run_cli({"fit", "--data", csv, "--k", "5", "--restarts", "1",
                       "--out", dir.file("m.json")}) == 2);
  // Bad method names are usage errors.
  CHECK(melm::run_cli({"eval", "--data", csv, "--protocol", "pipeline",
                       "--methods", "lda", "--out", dir.file("r.json")}) == 2);
  // Unknown protocol is caught by the option check.
  CHECK(melm::run_cli({"eval", "--data", csv, "--protocol", "sideways",
                       "--out", dir.file("r.json")}) == 2);
}

TEST_CASE("runtime failures exit 1") {
  const testutil::TempDir dir;
  CHECK(melm::run_cli({"fit", "--data", dir.file("absent.csv"), "--k", "1",
                       "--out", dir.file("m.json")}) == 1);
  // Unparseable data is a runtime failure of the load-data stage.
  const auto bad = testutil::write_text(dir.file("bad.csv"),
                                        "x1,x2,label\n1,oops,-1\n2,3,1\n");
  CHECK(melm::run_cli({"fit", "--data", bad, "--k", "1",
                       "--out", dir.file("m.json")}) == 1);
}

TEST_CASE("fit writes a valid, reproducible model") {
  const testutil::TempDir dir;
  const auto csv = write_blob_csv(dir, "data.csv");
  const auto model_path = dir.file("model.json");

  CHECK(melm::run_cli({"fit", "--data", csv, "--k", "1", "--restarts", "2",
                       "--seed", "3", "--max-iters", "80", "--out",
                       model_path}) == 0);

  const auto model = melm::load_model(model_path);
  CHECK(model.d == 2);
  CHECK(model.k == 1);
  CHECK(model.gamma == 1.0);
  CHECK(model.restarts == 2);
  CHECK(model.seed == 3);
  CHECK(model.optim.max_iters == 80);
  CHECK(model.dcs > 0.0);
  CHECK(model.dataset_fingerprint ==
        melm::dataset_fingerprint(melm::load_csv(csv)));

  // Same flags -> byte-identical model file.
  const auto again_path = dir.file("model_again.json");
  CHECK(melm::run_cli({"fit", "--data", csv, "--k", "1", "--restarts", "2",
                       "--seed", "3", "--max-iters", "80", "--out",
                       again_path}) == 0);
  CHECK(testutil::read_text(again_path) == testutil::read_text(model_path));

  // A different seed produces a different artifact (restart starts differ).
  const auto other_path = dir.file("model_other.json");
  CHECK(melm::run_cli({"fit", "--data", csv, "--k", "1", "--restarts", "2",
                       "--seed", "4", "--max-iters", "80", "--out",
                       other_path}) == 0);
  CHECK(testutil::read_text(other_path) != testutil::read_text(model_path));
}

TEST_CASE("fit can pick gamma from the grid") {
  const testutil::TempDir dir;
  const auto csv = write_blob_csv(dir, "data.csv");
  const auto model_path = dir.file("model.json");
  CHECK(melm::run_cli({"fit", "--data", csv, "--k", "1", "--restarts", "1",
                       "--max-iters", "40", "--gamma-grid", "--out",
                       model_path}) == 0);
  const auto model = melm::load_model(model_path);
  CHECK(model.gamma >= 0.25);
  CHECK(model.gamma <= 2.0);
}

TEST_CASE("transform projects data and is idempotent") {
  const testutil::TempDir dir;
  const auto csv = write_blob_csv(dir, "data.csv");
  const auto model_path = dir.file("model.json");
  REQUIRE(melm::run_cli({"fit", "--data", csv, "--k", "1", "--restarts", "1",
                         "--max-iters", "60", "--out", model_path}) == 0);

  const auto out_path = dir.file("projected.csv");
  CHECK(melm::run_cli({"transform", "--model", model_path, "--data", csv,
                       "--out", out_path}) == 0);
  const auto text = testutil::read_text(out_path);
  CHECK(text.rfind("x1,label\n", 0) == 0);
  CHECK(count_lines(text) == 25);  // header + 24 samples

  // Verify the numbers: column = v^T x for the first data row.
  const auto ds = melm::load_csv(csv);
  const auto model = melm::load_model(model_path);
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);  // header
  std::getline(lines, line);
  const double first = std::strtod(line.c_str(), nullptr);
  CHECK(first == (model.v.transpose() * ds.points.col(0))(0));

  // Re-running writes identical bytes.
  const auto again_path = dir.file("projected_again.csv");
  CHECK(melm::run_cli({"transform", "--model", model_path, "--data", csv,
                       "--out", again_path}) == 0);
  CHECK(testutil::read_text(again_path) == text);

  // Dimension mismatch is a runtime error.
  const auto wide = testutil::write_text(
      dir.file("wide.csv"), "a,b,c,label\n1,2,3,-1\n4,5,6,1\n2,1,0,-1\n"
                            "3,3,3,1\n");
  CHECK(melm::run_cli({"transform", "--model", model_path, "--data", wide,
                       "--out", dir.file("nope.csv")}) == 1);

  // A same-dimension dataset with a different fingerprint only warns.
  const auto other = write_blob_csv(dir, "other.csv");
  auto shifted = testutil::read_text(other);
  const auto moved_path =
      testutil::write_text(dir.file("moved.csv"), shifted + "0.5,0.5,1\n");
  CHECK(melm::run_cli({"transform", "--model", model_path, "--data",
                       moved_path, "--out", dir.file("warned.csv")}) == 0);
}

TEST_CASE("eval writes a parseable report for both protocols") {
  const testutil::TempDir dir;
  const auto csv = write_blob_csv(dir, "data.csv");

  const auto pipe_path = dir.file("pipeline.json");
  CHECK(melm::run_cli({"eval", "--data", csv, "--protocol", "pipeline",
                       "--methods", "pca,identity", "--k", "1", "--folds", "3",
                       "--out", pipe_path}) == 0);
  const auto pipe = nlohmann::json::parse(testutil::read_text(pipe_path));
  CHECK(pipe.at("protocol") == "pipeline");
  CHECK(pipe.at("methods").size() == 2);
  CHECK(pipe.at("aggregates").size() == 2);
  // Clearly separated blobs: everything classifies perfectly.
  for (const auto& agg : pipe.at("aggregates")) {
    CHECK(agg.at("mean_bac").get<double>() == 1.0);
  }

  const auto sep_path = dir.file("separability.json");
  CHECK(melm::run_cli({"eval", "--data", csv, "--protocol", "separability",
                       "--methods", "pca", "--k", "1", "--folds", "3",
                       "--repeats", "2", "--subset-fraction", "0.75", "--out",
                       sep_path}) == 0);
  const auto sep = nlohmann::json::parse(testutil::read_text(sep_path));
  CHECK(sep.at("protocol") == "separability");
  CHECK(sep.at("config").at("repeats").get<int>() == 2);
  CHECK(sep.at("aggregates").at(0).at("per_repeat_mean").size() == 2);
}

TEST_CASE("restarts records one divergence per run plus an optional curve") {
  const testutil::TempDir dir;
  const auto csv = write_blob_csv(dir, "data.csv");

  const auto plain_path = dir.file("trace.csv");
  CHECK(melm::run_cli({"restarts", "--data", csv, "--k", "1", "--n", "4",
                       "--out", plain_path}) == 0);
  const auto plain = testutil::read_text(plain_path);
  CHECK(count_lines(plain) == 4);
  std::istringstream lines(plain);
  std::string line;
  while (std::getline(lines, line)) {
    CHECK(std::isfinite(std::strtod(line.c_str(), nullptr)));
  }

  const auto curve_path = dir.file("trace_curve.csv");
  CHECK(melm::run_cli({"restarts", "--data", csv, "--k", "1", "--n", "4",
                       "--curve", "3", "--out", curve_path}) == 0);
  const auto curved = testutil::read_text(curve_path);
  CHECK(count_lines(curved) == 8);  // 4 traces + section header + 3 rows
  CHECK(curved.find("s,expected_max\n") != std::string::npos);
  // The curve rows are "s,value" with s ascending from 1.
  const auto header_at = curved.find("s,expected_max\n");
  std::istringstream rows(curved.substr(header_at + 15));
  double previous = -1e300;
  int s_expected = 1;
  while (std::getline(rows, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    CHECK(std::stoi(line.substr(0, comma)) == s_expected++);
    const double value = std::strtod(line.c_str() + comma + 1, nullptr);
    CHECK(value >= previous);
    previous = value;
  }
  CHECK(s_expected == 4);
}

TEST_CASE("gradcheck passes on healthy data") {
  const testutil::TempDir dir;
  const auto csv = write_blob_csv(dir, "data.csv");
  CHECK(melm::run_cli({"gradcheck", "--data", csv, "--k", "1", "--trials",
                       "4"}) == 0);
  CHECK(melm::run_cli({"gradcheck", "--data", csv, "--k", "2", "--trials",
                       "2", "--gamma", "0.7"}) == 0);
}

TEST_CASE("plotdata writes the documented files for k = 1 and k = 2") {
  namespace fs = std::filesystem;
  const testutil::TempDir dir;
  const auto csv = write_blob_csv(dir, "data.csv");

  const auto m1 = dir.file("m1.json");
  REQUIRE(melm::run_cli({"fit", "--data", csv, "--k", "1", "--restarts", "1",
                         "--max-iters", "60", "--out", m1}) == 0);
  const auto out1 = dir.file("plot1");
  CHECK(melm::run_cli({"plotdata", "--model", m1, "--data", csv, "--grid",
                       "16", "--out", out1}) == 0);
  CHECK(fs::exists(fs::path(out1) / "projected.csv"));
  CHECK(fs::exists(fs::path(out1) / "density_minus.csv"));
  CHECK(fs::exists(fs::path(out1) / "density_plus.csv"));
  CHECK_FALSE(fs::exists(fs::path(out1) / "axes.csv"));
  const auto curve = testutil::read_text((fs::path(out1) / "density_minus.csv").string());
  CHECK(curve.rfind("x,density\n", 0) == 0);
  CHECK(count_lines(curve) == 17);  // header + one row per grid node

  const auto m2 = dir.file("m2.json");
  REQUIRE(melm::run_cli({"fit", "--data", csv, "--k", "2", "--restarts", "1",
                         "--max-iters", "60", "--out", m2}) == 0);
  const auto out2 = dir.file("plot2");
  CHECK(melm::run_cli({"plotdata", "--model", m2, "--data", csv, "--grid",
                       "16", "--out", out2}) == 0);
  CHECK(fs::exists(fs::path(out2) / "axes.csv"));
  const auto raster = testutil::read_text((fs::path(out2) / "density_minus.csv").string());
  CHECK(count_lines(raster) == 16);  // one row per y node
  const auto axes = testutil::read_text((fs::path(out2) / "axes.csv").string());
  CHECK(count_lines(axes) == 2);

  // The projected csv for k = 2 has three columns.
  const auto projected = testutil::read_text((fs::path(out2) / "projected.csv").string());
  CHECK(projected.rfind("x1,x2,label\n", 0) == 0);
}
