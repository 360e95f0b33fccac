#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace {

double popcount_max(const std::vector<double>& values, unsigned mask) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask & (1u << i)) best = std::max(best, values[i]);
  }
  return best;
}

/// Simpson weights 1,4,2,...,4,1 for an even interval count.
std::vector<double> simpson_weights(int nodes) {
  std::vector<double> w(static_cast<std::size_t>(nodes), 0.0);
  w.front() = 1.0;
  w.back() = 1.0;
  for (int i = 1; i + 1 < nodes; ++i) w[static_cast<std::size_t>(i)] = i % 2 ? 4.0 : 2.0;
  return w;
}

}  // namespace

Eigen::MatrixXd fd_gradient(
    const std::function<double(const Eigen::MatrixXd&)>& f,
    const Eigen::MatrixXd& m) {
  Eigen::MatrixXd grad(m.rows(), m.cols());
  Eigen::MatrixXd shifted = m;
  for (long c = 0; c < m.cols(); ++c) {
    for (long r = 0; r < m.rows(); ++r) {
      const double h = 1e-5 * (1.0 + std::abs(m(r, c)));
      shifted(r, c) = m(r, c) + h;
      const double up = f(shifted);
      shifted(r, c) = m(r, c) - h;
      const double down = f(shifted);
      shifted(r, c) = m(r, c);
      grad(r, c) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

double rel_err(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

double max_rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (long c = 0; c < a.cols(); ++c) {
    for (long r = 0; r < a.rows(); ++r) {
      worst = std::max(worst, rel_err(a(r, c), b(r, c)));
    }
  }
  return worst;
}

double mixture_density(const Eigen::MatrixXd& centers,
                       const Eigen::MatrixXd& cov, const Eigen::VectorXd& x) {
  const int k = static_cast<int>(centers.rows());
  double det = 0.0;
  Eigen::MatrixXd inv(k, k);
  if (k == 1) {
    det = cov(0, 0);
    inv(0, 0) = 1.0 / det;
  } else if (k == 2) {
    det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
    inv << cov(1, 1), -cov(0, 1), -cov(1, 0), cov(0, 0);
    inv /= det;
  } else {
    throw std::invalid_argument("mixture_density handles dimensions 1 and 2");
  }
  const double norm =
      1.0 / (std::pow(2.0 * std::numbers::pi, 0.5 * k) * std::sqrt(det));
  double sum = 0.0;
  for (long i = 0; i < centers.cols(); ++i) {
    const Eigen::VectorXd delta = x - centers.col(i);
    sum += norm * std::exp(-0.5 * delta.dot(inv * delta));
  }
  return sum / static_cast<double>(centers.cols());
}

double kde_product_integral(const Eigen::MatrixXd& centers_a,
                            const Eigen::MatrixXd& cov_a,
                            const Eigen::MatrixXd& centers_b,
                            const Eigen::MatrixXd& cov_b, int nodes) {
  const int k = static_cast<int>(centers_a.rows());
  if (nodes % 2 == 0) ++nodes;  // Simpson needs an even interval count

  const double spread =
      10.0 * std::sqrt(std::max(cov_a.diagonal().maxCoeff(),
                                cov_b.diagonal().maxCoeff()));
  Eigen::VectorXd lo(k);
  Eigen::VectorXd hi(k);
  for (int axis = 0; axis < k; ++axis) {
    lo(axis) = std::min(centers_a.row(axis).minCoeff(),
                        centers_b.row(axis).minCoeff()) -
               spread;
    hi(axis) = std::max(centers_a.row(axis).maxCoeff(),
                        centers_b.row(axis).maxCoeff()) +
               spread;
  }

  const std::vector<double> w = simpson_weights(nodes);
  if (k == 1) {
    const double h = (hi(0) - lo(0)) / (nodes - 1);
    double sum = 0.0;
    Eigen::VectorXd x(1);
    for (int i = 0; i < nodes; ++i) {
      x(0) = lo(0) + i * h;
      sum += w[static_cast<std::size_t>(i)] *
             mixture_density(centers_a, cov_a, x) *
             mixture_density(centers_b, cov_b, x);
    }
    return sum * h / 3.0;
  }
  if (k == 2) {
    const double hx = (hi(0) - lo(0)) / (nodes - 1);
    const double hy = (hi(1) - lo(1)) / (nodes - 1);
    double sum = 0.0;
    Eigen::VectorXd x(2);
    for (int i = 0; i < nodes; ++i) {
      x(0) = lo(0) + i * hx;
      double row = 0.0;
      for (int j = 0; j < nodes; ++j) {
        x(1) = lo(1) + j * hy;
        row += w[static_cast<std::size_t>(j)] *
               mixture_density(centers_a, cov_a, x) *
               mixture_density(centers_b, cov_b, x);
      }
      sum += w[static_cast<std::size_t>(i)] * row;
    }
    return sum * hx * hy / 9.0;
  }
  throw std::invalid_argument("kde_product_integral handles dimensions 1 and 2");
}

double expected_max_enumerated(const std::vector<double>& values, int s) {
  const int n = static_cast<int>(values.size());
  if (n > 20 || s < 1 || s > n) {
    throw std::invalid_argument("expected_max_enumerated: n <= 20, 1 <= s <= n");
  }
  double total = 0.0;
  long count = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != s) continue;
    total += popcount_max(values, mask);
    ++count;
  }
  return total / static_cast<double>(count);
}

double GridDensity::cell_volume() const {
  double v = 1.0;
  for (int i = 0; i < dim; ++i) v /= static_cast<double>(cells_per_axis);
  return v;
}

GridDensity random_grid_density(int dim, int cells_per_axis, melm::Rng& rng) {
  GridDensity out;
  out.dim = dim;
  out.cells_per_axis = cells_per_axis;
  std::size_t count = 1;
  for (int i = 0; i < dim; ++i) count *= static_cast<std::size_t>(cells_per_axis);
  out.cells.resize(count);
  double mass = 0.0;
  for (auto& cell : out.cells) {
    cell = 0.05 + rng.uniform();  // bounded away from zero
    mass += cell;
  }
  const double scale = 1.0 / (mass * out.cell_volume());
  for (auto& cell : out.cells) cell *= scale;
  return out;
}

double grid_overlap(const GridDensity& f, const GridDensity& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.cells.size(); ++i) {
    sum += std::min(f.cells[i], g.cells[i]);
  }
  return sum * f.cell_volume();
}

double grid_cross_renyi(const GridDensity& f, const GridDensity& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.cells.size(); ++i) sum += f.cells[i] * g.cells[i];
  return -std::log(sum * f.cell_volume());
}

Eigen::MatrixXd random_spd(int d, melm::Rng& rng) {
  Eigen::MatrixXd a(d, d);
  for (long c = 0; c < d; ++c) {
    for (long r = 0; r < d; ++r) a(r, c) = rng.normal();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd values(d);
  for (int i = 0; i < d; ++i) values(i) = 0.5 + 2.0 * rng.uniform();
  return q * values.asDiagonal() * q.transpose();
}

Eigen::MatrixXd random_invertible(int d, melm::Rng& rng) {
  Eigen::MatrixXd a(d, d);
  Eigen::MatrixXd b(d, d);
  for (long c = 0; c < d; ++c) {
    for (long r = 0; r < d; ++r) {
      a(r, c) = rng.normal();
      b(r, c) = rng.normal();
    }
  }
  const Eigen::MatrixXd q1 = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  const Eigen::MatrixXd q2 = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ();
  Eigen::VectorXd values(d);
  for (int i = 0; i < d; ++i) values(i) = 0.5 + 1.5 * rng.uniform();
  return q1 * values.asDiagonal() * q2.transpose();
}

melm::LabeledDataset random_blobs(int d, int n_per_class, melm::Rng& rng,
                                  double separation) {
  melm::LabeledDataset ds;
  ds.points.resize(d, 2 * n_per_class);
  ds.labels.resize(static_cast<std::size_t>(2 * n_per_class));
  Eigen::VectorXd offset(d);
  for (int i = 0; i < d; ++i) offset(i) = separation * rng.normal() / std::sqrt(d);
  for (int j = 0; j < 2 * n_per_class; ++j) {
    const int label = j < n_per_class ? -1 : 1;
    for (int i = 0; i < d; ++i) {
      ds.points(i, j) = rng.normal() + (label == 1 ? offset(i) : -offset(i));
    }
    ds.labels[static_cast<std::size_t>(j)] = label;
  }
  return ds;
}

melm::LabeledDataset planted_dataset(int d, int n_per_class,
                                     std::uint64_t seed) {
  melm::Rng rng(seed);
  melm::LabeledDataset ds;
  ds.points.resize(d, 2 * n_per_class);
  ds.labels.resize(static_cast<std::size_t>(2 * n_per_class));
  for (int j = 0; j < 2 * n_per_class; ++j) {
    const int label = j < n_per_class ? -1 : 1;
    // Corners (+,+)/(-,-) for one class, (+,-)/(-,+) for the other.
    const double sign0 = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double sign1 = label == -1 ? sign0 : -sign0;
    ds.points(0, j) = 2.0 * sign0 + 0.5 * rng.normal();
    ds.points(1, j) = 2.0 * sign1 + 0.5 * rng.normal();
    for (int i = 2; i < d; ++i) ds.points(i, j) = 3.0 * rng.normal();
    ds.labels[static_cast<std::size_t>(j)] = label;
  }
  return ds;
}

double subspace_gap(const Eigen::MatrixXd& v1, const Eigen::MatrixXd& v2) {
  const auto projector = [](const Eigen::MatrixXd& v) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
    const Eigen::MatrixXd q =
        qr.householderQ() * Eigen::MatrixXd::Identity(v.rows(), v.cols());
    return Eigen::MatrixXd(q * q.transpose());
  };
  return (projector(v1) - projector(v2)).norm();
}

}  // namespace oracle
