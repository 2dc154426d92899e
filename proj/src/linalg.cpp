#include "kcoddp/linalg.hpp"

#include <cmath>
#include <numbers>

#include "kcoddp/error.hpp"

namespace kcoddp::linalg {

JitteredCholesky::JitteredCholesky(const Eigen::MatrixXd& cov) {
  const auto n = cov.rows();
  if (n != cov.cols()) throw InvalidParameter("cholesky: matrix must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    L = llt.matrixL();
    return;
  }
  for (double j = 1e-8; j <= 1e-4 * 1.0000001; j *= 10.0) {
    llt.compute(cov + j * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      L = llt.matrixL();
      jitter = j;
      return;
    }
  }
  throw NumericalError("cholesky: covariance not positive definite after jitter 1e-4");
}

double JitteredCholesky::log_det() const {
  return 2.0 * L.diagonal().array().log().sum();
}

double JitteredCholesky::log_density(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd w = whiten(x);
  return -0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det() -
         0.5 * w.squaredNorm();
}

Eigen::VectorXd JitteredCholesky::whiten(const Eigen::VectorXd& b) const {
  return L.triangularView<Eigen::Lower>().solve(b);
}

Eigen::MatrixXd JitteredCholesky::solve(const Eigen::MatrixXd& B) const {
  const Eigen::MatrixXd Y = L.triangularView<Eigen::Lower>().solve(B);
  return L.transpose().triangularView<Eigen::Upper>().solve(Y);
}

}  // namespace kcoddp::linalg
