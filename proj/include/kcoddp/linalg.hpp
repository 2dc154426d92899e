#pragma once

#include <Eigen/Dense>

namespace kcoddp::linalg {

/// Lower Cholesky factor of `cov + jitter I`. Tries the matrix as given, then
/// jitter 1e-8, escalating x10 up to 1e-4; throws NumericalError past that.
struct JitteredCholesky {
  Eigen::MatrixXd L;
  double jitter = 0.0;

  explicit JitteredCholesky(const Eigen::MatrixXd& cov);

  /// log det(L L^T)
  double log_det() const;
  /// log N(x | 0, L L^T)
  double log_density(const Eigen::VectorXd& x) const;
  /// L^{-1} b
  Eigen::VectorXd whiten(const Eigen::VectorXd& b) const;
  /// (L L^T)^{-1} B
  Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;
};

}  // namespace kcoddp::linalg
