#pragma once

#include <vector>

#include <Eigen/Dense>

#include "kcoddp/geometry.hpp"
#include "kcoddp/rng.hpp"

namespace kcoddp::kernel {

inline constexpr double kHigdonA = 3.5;

/// Sigma(s)^{1/2}; Sigma(s) = m^T m.
struct AnisotropyMatrix {
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();

  Eigen::Matrix2d sigma() const { return m.transpose() * m; }
};

/// Kernel bandwidth fields evaluated at the data sites.
struct KernelFieldParams {
  double phi = 5.0;
  double A = kHigdonA;
  std::vector<double> psi1;
  std::vector<double> psi2;
  std::vector<double> log_delta;
  double tau = 0.0;
  double b_psi = 10.0;
  double a_delta = 10.0;
  double sigma2_psi = 1.0;
  double sigma2_delta = 1.0;
};

/// Higdon-style square-root dispersion: phi * diag(d+, d-) * R(atan2(psi2, psi1)),
/// d+- = sqrt( sqrt(4A^2 + |psi|^4 pi^2)/(2 pi) +- |psi|^2/2 ).
AnisotropyMatrix sigma_half(double psi1, double psi2, double phi, double A = kHigdonA);

/// exp{-1/2 (s-theta)^T Sigma(s) (s-theta) - delta(t) |t - tau|}
double kernel_eval(const geometry::SpaceTimePoint& x, const Eigen::Vector2d& theta, double tau,
                   const AnisotropyMatrix& sigma_half, double delta_t);

/// Spatial factor only: exp{-1/2 (s-theta)^T Sigma(s) (s-theta)}.
double spatial_kernel(double s1, double s2, const Eigen::Vector2d& theta,
                      const AnisotropyMatrix& sigma_half);

/// c_psi(s_i, s_j) = sigma2 exp{-|s_i - s_j|^2 / b_psi}
Eigen::MatrixXd gp_covariance_psi(const std::vector<Eigen::Vector2d>& locations, double b_psi,
                                  double sigma2 = 1.0);

/// c_delta(t_i, t_j) = sigma2 exp{-(t_i - t_j)^2 / a_delta} (decaying form)
Eigen::MatrixXd gp_covariance_delta(const std::vector<double>& times, double a_delta,
                                    double sigma2 = 1.0);

struct FieldDraw {
  Eigen::VectorXd psi1;
  Eigen::VectorXd psi2;
  Eigen::VectorXd log_delta;
};

FieldDraw sample_fields(const std::vector<Eigen::Vector2d>& locations,
                        const std::vector<double>& times, double b_psi, double a_delta, Rng& rng);

}  // namespace kcoddp::kernel
