#pragma once

#include <Eigen/Dense>

#include "melm/projection.hpp"

namespace melm {

/// Full eigendecomposition of a symmetric matrix: eigenvalues descending,
/// eigenvectors in matching columns, each column's largest-magnitude entry
/// made positive so outputs are stable across runs and platforms.
struct EigenDecomposition {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // d x d orthonormal, column i pairs with values[i]
};

EigenDecomposition symmetric_eigen_sorted(const Eigen::MatrixXd& m);

/// Top-k eigenvectors of the sample covariance of the pooled data. If
/// `degenerate_spectrum` is given it is set when the k-th and (k+1)-th
/// eigenvalues tie (within 1e-12 of the largest), i.e. the spanned subspace
/// is not unique and the eigensolver's order decided it.
ProjectionMatrix pca(const Eigen::MatrixXd& points, int k,
                     bool* degenerate_spectrum = nullptr);

/// Top-k eigenvectors of the summed class covariances. Weighted variant
/// scales each class covariance by its share of the samples; unweighted adds
/// them as-is. Equal class sizes make the two spans coincide.
ProjectionMatrix class_pca(const Eigen::MatrixXd& x_plus,
                           const Eigen::MatrixXd& x_minus, int k,
                           bool weighted);

/// Two-column projection [pc1 of the -1 class, pc1 of the +1 class], kept
/// raw (possibly non-orthogonal). If the two directions are collinear to
/// within 1e-6 radians, the second column is replaced by the second pooled
/// principal component and `collinear_fallback` (if given) is set.
ProjectionMatrix per_class_pca(const Eigen::MatrixXd& x_plus,
                               const Eigen::MatrixXd& x_minus,
                               bool* collinear_fallback = nullptr);

/// Quadratic Renyi entropy of the maximum-likelihood Gaussian fit of the
/// projected data: (k/2) log(4 pi) + (1/2) log det(V^T Sigma V) with Sigma
/// the sample covariance. Serves as the closed-form objective whose extrema
/// are the top-k / bottom-k principal subspaces.
double gaussian_mle_entropy(const Eigen::MatrixXd& points,
                            const ProjectionMatrix& v);

/// First-k-coordinates projection (d x k slice of the identity).
ProjectionMatrix identity_projection(int d, int k);

}  // namespace melm
