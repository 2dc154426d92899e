#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kcoddp/error.hpp"
#include "kcoddp/linalg.hpp"
#include "kcoddp/rng.hpp"

using namespace kcoddp;

namespace {

Eigen::MatrixXd random_spd(int n, Rng& rng) {
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = rng.normal();
  return B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("Cholesky of an SPD matrix") {
  Rng rng(3);
  const auto C = random_spd(6, rng);
  const linalg::JitteredCholesky ch(C);
  CHECK(ch.jitter == 0.0);
  CHECK((ch.L * ch.L.transpose() - C).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(ch.log_det() == doctest::Approx(std::log(C.determinant())).epsilon(1e-12));

  Eigen::VectorXd x(6);
  for (int i = 0; i < 6; ++i) x[i] = rng.normal();
  const double direct = -3.0 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(C.determinant()) -
                        0.5 * x.dot(C.inverse() * x);
  CHECK(ch.log_density(x) == doctest::Approx(direct).epsilon(1e-12));
  CHECK((ch.L * ch.whiten(x) - x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((C * ch.solve(x) - x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("jitter escalation") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  const linalg::JitteredCholesky ch(ones);
  CHECK(ch.jitter > 0.0);
  CHECK(ch.jitter <= 1e-4);
  CHECK(((ch.L * ch.L.transpose()) - ones).cwiseAbs().maxCoeff() <= ch.jitter * 1.0000001);

  const Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(linalg::JitteredCholesky{neg}, NumericalError);
  CHECK_THROWS_AS(linalg::JitteredCholesky{Eigen::MatrixXd::Identity(2, 3)}, InvalidParameter);
}
