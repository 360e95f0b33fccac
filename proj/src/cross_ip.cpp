#include "melm/cross_ip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "melm/error.hpp"
#include "melm/linalg.hpp"
#include "melm/runtime.hpp"

namespace melm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

/// Shared per-evaluation state: projected centers and the inverse projected
/// kernel covariance.
struct Prepared {
  Eigen::MatrixXd ua;     // k x n_a
  Eigen::MatrixXd ub;     // k x n_b
  Eigen::MatrixXd s_inv;  // (V^T Sigma_AB V)^{-1}
  double logdet = 0.0;    // logdet(V^T Sigma_AB V)
};

Prepared prepare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                 const Eigen::MatrixXd& sigma_ab, const Eigen::MatrixXd& v) {
  const auto d = v.rows();
  const auto k = v.cols();
  if (a.rows() != d || b.rows() != d || sigma_ab.rows() != d ||
      sigma_ab.cols() != d) {
    throw ValidationError("cross information potential: dimension mismatch "
                          "between classes, kernel covariance, and projection");
  }
  if (a.cols() < 1 || b.cols() < 1) {
    throw ValidationError("cross information potential needs nonempty classes");
  }
  Prepared prep;
  Eigen::MatrixXd projected = symmetrized(v.transpose() * sigma_ab * v);
  const auto llt = spd_cholesky_inplace(projected, "projected kernel covariance");
  prep.s_inv = llt.solve(Eigen::MatrixXd::Identity(k, k));
  prep.logdet = logdet_from_llt(llt);
  prep.ua.noalias() = v.transpose() * a;
  prep.ub.noalias() = v.transpose() * b;
  return prep;
}

/// Partial sums over one contiguous range of pair indices (pair t maps to
/// centers (t / n_b, t % n_b)). All weights inside a chunk are shifted by the
/// chunk's own maximum, which keeps every partial finite; the merge step
/// rescales chunks onto a common shift.
struct ChunkSums {
  double max_shift = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  Eigen::MatrixXd g1;  // sum of weight * (a_i - b_j) (u_i - u_j)^T, d x k
  Eigen::MatrixXd g2;  // sum of weight * (u_i - u_j)(u_i - u_j)^T, k x k
};

ChunkSums eval_chunk(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                     const Prepared& prep, long long begin, long long end,
                     bool with_grad) {
  const auto d = a.rows();
  const auto k = prep.ua.rows();
  const auto n_b = b.cols();
  ChunkSums out;
  if (with_grad) {
    out.g1 = Eigen::MatrixXd::Zero(d, k);
    out.g2 = Eigen::MatrixXd::Zero(k, k);
  }

  // Pass 1: quadratic forms and the chunk maximum of the log weights.
  std::vector<double> shifts(static_cast<std::size_t>(end - begin));
  Eigen::VectorXd u(k);
  Eigen::VectorXd su(k);
  for (long long t = begin; t < end; ++t) {
    const auto i = static_cast<Eigen::Index>(t / n_b);
    const auto j = static_cast<Eigen::Index>(t % n_b);
    u = prep.ua.col(i) - prep.ub.col(j);
    su.noalias() = prep.s_inv * u;
    const double shift = -0.5 * u.dot(su);
    shifts[static_cast<std::size_t>(t - begin)] = shift;
    out.max_shift = std::max(out.max_shift, shift);
  }

  // Pass 2: accumulate, skipping pairs whose weight cannot move the sums.
  Eigen::VectorXd w(d);
  for (long long t = begin; t < end; ++t) {
    const double shifted = shifts[static_cast<std::size_t>(t - begin)] - out.max_shift;
    if (shifted < kLogWeightCutoff) continue;
    const double weight = std::exp(shifted);
    out.sum += weight;
    if (with_grad) {
      const auto i = static_cast<Eigen::Index>(t / n_b);
      const auto j = static_cast<Eigen::Index>(t % n_b);
      u = prep.ua.col(i) - prep.ub.col(j);
      w = a.col(i) - b.col(j);
      out.g1.noalias() += weight * w * u.transpose();
      out.g2.noalias() += weight * u * u.transpose();
    }
  }
  return out;
}

/// Merges chunk partials in chunk order and assembles the final value and
/// gradient. The merge order is fixed, so the result does not depend on how
/// chunks were scheduled across threads.
CrossIpTerms assemble(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const Eigen::MatrixXd& sigma_ab, const Eigen::MatrixXd& v,
                      const Prepared& prep, const std::vector<ChunkSums>& chunks,
                      bool with_grad) {
  const auto d = v.rows();
  const auto k = v.cols();
  const double n_a = static_cast<double>(a.cols());
  const double n_b = static_cast<double>(b.cols());

  double max_shift = -std::numeric_limits<double>::infinity();
  for (const auto& chunk : chunks) max_shift = std::max(max_shift, chunk.max_shift);

  double total = 0.0;
  Eigen::MatrixXd g1;
  Eigen::MatrixXd g2;
  if (with_grad) {
    g1 = Eigen::MatrixXd::Zero(d, k);
    g2 = Eigen::MatrixXd::Zero(k, k);
  }
  for (const auto& chunk : chunks) {
    const double rescale = std::exp(chunk.max_shift - max_shift);
    if (rescale == 0.0) continue;
    total += rescale * chunk.sum;
    if (with_grad) {
      g1 += rescale * chunk.g1;
      g2 += rescale * chunk.g2;
    }
  }

  CrossIpTerms terms;
  terms.log_ip = -0.5 * static_cast<double>(k) * kLog2Pi - 0.5 * prep.logdet -
                 std::log(n_a) - std::log(n_b) + max_shift + std::log(total);
  if (with_grad) {
    // With p_w the normalized pair weights, u_w = V^T w, and
    // C = Sigma_AB V S^{-1}:
    //   grad log ip = -(sum_w p_w w u_w^T - C sum_w p_w u_w u_w^T) S^{-1} - C.
    const Eigen::MatrixXd w1 = g1 / total;
    const Eigen::MatrixXd w2 = g2 / total;
    const Eigen::MatrixXd c = sigma_ab * v * prep.s_inv;
    terms.grad = -(w1 - c * w2) * prep.s_inv - c;
  }
  return terms;
}

}  // namespace

CrossIpTerms cross_ip_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const Eigen::MatrixXd& sigma_ab,
                             const Eigen::MatrixXd& v, bool with_grad) {
  const Prepared prep = prepare(a, b, sigma_ab, v);
  const auto d = a.rows();
  const auto k = v.cols();
  const auto n_a = a.cols();
  const auto n_b = b.cols();

  // Reference form: one global log-sum-exp over every pair, no chunking.
  double max_shift = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd u(k);
  Eigen::VectorXd su(k);
  for (Eigen::Index i = 0; i < n_a; ++i) {
    for (Eigen::Index j = 0; j < n_b; ++j) {
      u = prep.ua.col(i) - prep.ub.col(j);
      su.noalias() = prep.s_inv * u;
      max_shift = std::max(max_shift, -0.5 * u.dot(su));
    }
  }
  double total = 0.0;
  Eigen::MatrixXd g1;
  Eigen::MatrixXd g2;
  if (with_grad) {
    g1 = Eigen::MatrixXd::Zero(d, k);
    g2 = Eigen::MatrixXd::Zero(k, k);
  }
  Eigen::VectorXd w(d);
  for (Eigen::Index i = 0; i < n_a; ++i) {
    for (Eigen::Index j = 0; j < n_b; ++j) {
      u = prep.ua.col(i) - prep.ub.col(j);
      su.noalias() = prep.s_inv * u;
      const double shifted = -0.5 * u.dot(su) - max_shift;
      if (shifted < kLogWeightCutoff) continue;
      const double weight = std::exp(shifted);
      total += weight;
      if (with_grad) {
        w = a.col(i) - b.col(j);
        g1.noalias() += weight * w * u.transpose();
        g2.noalias() += weight * u * u.transpose();
      }
    }
  }

  CrossIpTerms terms;
  terms.log_ip = -0.5 * static_cast<double>(k) * kLog2Pi - 0.5 * prep.logdet -
                 std::log(static_cast<double>(n_a)) -
                 std::log(static_cast<double>(n_b)) + max_shift + std::log(total);
  if (with_grad) {
    const Eigen::MatrixXd w1 = g1 / total;
    const Eigen::MatrixXd w2 = g2 / total;
    const Eigen::MatrixXd c = sigma_ab * v * prep.s_inv;
    terms.grad = -(w1 - c * w2) * prep.s_inv - c;
  }
  return terms;
}

CrossIpTerms cross_ip_parallel(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b,
                               const Eigen::MatrixXd& sigma_ab,
                               const Eigen::MatrixXd& v, bool with_grad) {
  const Prepared prep = prepare(a, b, sigma_ab, v);
  const long long n_pairs =
      static_cast<long long>(a.cols()) * static_cast<long long>(b.cols());
  const long long n_chunks = (n_pairs + kPairChunk - 1) / kPairChunk;
  std::vector<ChunkSums> chunks(static_cast<std::size_t>(n_chunks));

#pragma omp parallel for schedule(dynamic) num_threads(max_threads()) \
    if (n_chunks > 1)
  for (long long c = 0; c < n_chunks; ++c) {
    const long long begin = c * kPairChunk;
    const long long end = std::min(begin + kPairChunk, n_pairs);
    chunks[static_cast<std::size_t>(c)] =
        eval_chunk(a, b, prep, begin, end, with_grad);
  }

  return assemble(a, b, sigma_ab, v, prep, chunks, with_grad);
}

CrossIpTerms cross_ip(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const Eigen::MatrixXd& sigma_ab, const Eigen::MatrixXd& v,
                      bool with_grad) {
  const long long n_pairs =
      static_cast<long long>(a.cols()) * static_cast<long long>(b.cols());
  if (n_pairs <= kPairChunk) {
    // Single chunk: identical arithmetic to the parallel path, without the
    // cost of opening a parallel region.
    const Prepared prep = prepare(a, b, sigma_ab, v);
    const std::vector<ChunkSums> chunks = {
        eval_chunk(a, b, prep, 0, n_pairs, with_grad)};
    return assemble(a, b, sigma_ab, v, prep, chunks, with_grad);
  }
  return cross_ip_parallel(a, b, sigma_ab, v, with_grad);
}

}  // namespace melm
