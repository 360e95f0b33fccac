// Benchmark of the pairwise cross-information-potential kernel: serial
// reference vs. the chunked OpenMP version, on synthetic Gaussian blobs.
// Reports timings, speedup, and the numeric gap between the two.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "melm/cross_ip.hpp"
#include "melm/density.hpp"
#include "melm/optimizer.hpp"
#include "melm/rng.hpp"
#include "melm/runtime.hpp"

namespace {

Eigen::MatrixXd blob(int d, int n, double center, melm::Rng& rng) {
  Eigen::MatrixXd points(d, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < d; ++i) points(i, j) = center + rng.normal();
  }
  return points;
}

template <typename Fn>
double best_of(int reps, Fn&& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    fn();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  const int d = 6;
  const int k = 2;
  std::vector<int> sizes = {128, 256, 512, 1024, 2048};
  if (quick) sizes = {128, 512};

  melm::Rng rng(42);
  std::printf("threads: %d\n\n", melm::max_threads());
  std::printf("%10s %12s %12s %9s %14s %14s\n", "n/class", "serial ms",
              "parallel ms", "speedup", "|dlog_ip|", "max |dgrad|");

  for (const int n : sizes) {
    const Eigen::MatrixXd a = blob(d, n, 0.5, rng);
    const Eigen::MatrixXd b = blob(d, n, -0.5, rng);
    const Eigen::MatrixXd sigma =
        melm::pooled_bandwidth_cov(a, b, k, {}).sigma_ab;
    const Eigen::MatrixXd v = melm::random_orthonormal(d, k, 7).v;

    melm::CrossIpTerms serial;
    melm::CrossIpTerms parallel;
    const double t_serial = best_of(3, [&] {
      serial = melm::cross_ip_serial(a, b, sigma, v, /*with_grad=*/true);
    });
    const double t_parallel = best_of(3, [&] {
      parallel = melm::cross_ip_parallel(a, b, sigma, v, /*with_grad=*/true);
    });

    const double dlog = std::abs(serial.log_ip - parallel.log_ip);
    const double dgrad = (serial.grad - parallel.grad).cwiseAbs().maxCoeff();
    std::printf("%10d %12.3f %12.3f %9.2f %14.3e %14.3e\n", n,
                1e3 * t_serial, 1e3 * t_parallel, t_serial / t_parallel, dlog,
                dgrad);
  }
  return 0;
}
