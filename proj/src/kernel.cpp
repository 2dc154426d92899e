#include "kcoddp/kernel.hpp"

#include <cmath>
#include <numbers>

#include "kcoddp/error.hpp"
#include "kcoddp/linalg.hpp"

namespace kcoddp::kernel {

AnisotropyMatrix sigma_half(double psi1, double psi2, double phi, double A) {
  require(phi > 0.0, "sigma_half: phi must be positive");
  require(A > 0.0, "sigma_half: A must be positive");
  constexpr double pi = std::numbers::pi;
  const double norm2 = psi1 * psi1 + psi2 * psi2;
  const double root = std::sqrt(4.0 * A * A + norm2 * norm2 * pi * pi) / (2.0 * pi);
  const double major = std::sqrt(root + 0.5 * norm2);
  // root - norm2/2 = 2A^2 / (pi^2 (root + norm2/2)) without the cancellation.
  const double minor = std::sqrt(A * A / (pi * pi) / (root + 0.5 * norm2));
  const double angle = std::atan2(psi2, psi1);  // atan2(0, 0) == 0
  const double c = std::cos(angle), s = std::sin(angle);
  AnisotropyMatrix out;
  out.m << phi * major * c, phi * major * s,
          -phi * minor * s, phi * minor * c;
  return out;
}

double spatial_kernel(double s1, double s2, const Eigen::Vector2d& theta,
                      const AnisotropyMatrix& sh) {
  const Eigen::Vector2d d(s1 - theta[0], s2 - theta[1]);
  return std::exp(-0.5 * (sh.m * d).squaredNorm());
}

double kernel_eval(const geometry::SpaceTimePoint& x, const Eigen::Vector2d& theta, double tau,
                   const AnisotropyMatrix& sh, double delta_t) {
  require(delta_t > 0.0, "kernel_eval: delta(t) must be positive");
  const Eigen::Vector2d d(x.s1 - theta[0], x.s2 - theta[1]);
  return std::exp(-0.5 * (sh.m * d).squaredNorm() - delta_t * std::fabs(x.t - tau));
}

Eigen::MatrixXd gp_covariance_psi(const std::vector<Eigen::Vector2d>& locations, double b_psi,
                                  double sigma2) {
  require(b_psi > 0.0, "gp_covariance_psi: b_psi must be positive");
  const auto n = static_cast<Eigen::Index>(locations.size());
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    C(i, i) = sigma2;
    for (Eigen::Index j = 0; j < i; ++j)
      C(i, j) = C(j, i) = sigma2 * std::exp(-(locations[i] - locations[j]).squaredNorm() / b_psi);
  }
  return C;
}

Eigen::MatrixXd gp_covariance_delta(const std::vector<double>& times, double a_delta,
                                    double sigma2) {
  require(a_delta > 0.0, "gp_covariance_delta: a_delta must be positive");
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    C(i, i) = sigma2;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double dt = times[i] - times[j];
      C(i, j) = C(j, i) = sigma2 * std::exp(-dt * dt / a_delta);
    }
  }
  return C;
}

namespace {

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  return z;
}

}  // namespace

FieldDraw sample_fields(const std::vector<Eigen::Vector2d>& locations,
                        const std::vector<double>& times, double b_psi, double a_delta, Rng& rng) {
  const linalg::JitteredCholesky psi_chol(gp_covariance_psi(locations, b_psi));
  const linalg::JitteredCholesky delta_chol(gp_covariance_delta(times, a_delta));
  const auto n = static_cast<Eigen::Index>(locations.size());
  const auto m = static_cast<Eigen::Index>(times.size());
  FieldDraw out;
  out.psi1 = psi_chol.L * standard_normal(n, rng);
  out.psi2 = psi_chol.L * standard_normal(n, rng);
  out.log_delta = delta_chol.L * standard_normal(m, rng);
  return out;
}

}  // namespace kcoddp::kernel
