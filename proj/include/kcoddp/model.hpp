#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kcoddp/geometry.hpp"
#include "kcoddp/kernel.hpp"
#include "kcoddp/rng.hpp"

namespace kcoddp::model {

using geometry::SpaceTimePoint;

/// The transdimensional block: k atoms, each with a stick fraction, a
/// point-process location and a kernel centre (theta1, theta2).
struct VariableState {
  std::vector<double> V;
  std::vector<SpaceTimePoint> z;
  std::vector<double> theta1;
  std::vector<double> theta2;

  std::size_t k() const { return V.size(); }
  bool consistent() const {
    return z.size() == V.size() && theta1.size() == V.size() && theta2.size() == V.size();
  }
};

/// Fixed-dimensional parameters. psi1, psi2 and log_delta hold the field
/// values at the data sites, aligned with the dataset rows.
struct FixedState {
  double phi = 5.0;
  double a_delta = 10.0;
  double b_psi = 10.0;
  std::vector<double> psi1;
  std::vector<double> psi2;
  std::vector<double> log_delta;
  double tau = 0.0;
  double alpha = 1.0;
  double lambda = 5.0;
  double sigma = 1.0;
  double alpha0 = 0.0;  // regression intercept (regression mode only)
  double alpha1 = 0.0;  // regression slope on the log covariate
};

struct Dataset {
  std::vector<SpaceTimePoint> points;
  std::vector<double> y;
  std::optional<std::vector<double>> covariate;

  std::size_t size() const { return points.size(); }
  bool regression() const { return covariate.has_value(); }
  /// Copy without row i (leave-one-out).
  Dataset without(std::size_t i) const;
};

/// Bivariate normal centring distribution: zero means, unit variances, correlation rho.
struct CenteringDistribution {
  double rho = 0.0;

  double log_density(double theta1, double theta2) const;
  Eigen::Vector2d sample(Rng& rng) const;
};

struct Hyper {
  std::size_t k_max = 30;
  double n0 = 1.0;         // prior median of alpha
  double eta = 2.0;        // inverted-Beta shape
  double b_lambda = 20.0;  // log-variance of the lambda prior
  double uniform_lo = 3.0;
  double uniform_hi = 200.0;
  double A = kernel::kHigdonA;
  double tau_sd = 1.0;
  double sigma_log_mean = 0.0;
  double sigma_log_sd = 1.0;
  double regression_prior_var = 1e4;
};

/// Everything the posterior needs besides the parameters themselves.
struct ModelContext {
  Dataset data;
  Hyper hyper;
  geometry::ComputationalBox box;
  CenteringDistribution g0;
  std::vector<Eigen::Vector2d> locations;  // (s1, s2) of each row
  std::vector<double> times;

  ModelContext(Dataset data, Hyper hyper, geometry::ComputationalBox box, double rho);
};

/// Empirical correlation of the two spatial coordinates (the G0 correlation).
double empirical_rho(const Dataset& data);

/// Kernel parameters evaluated at one site.
struct SiteKernel {
  kernel::AnisotropyMatrix sigma_half;
  double delta = 1.0;
};

SiteKernel site_kernel(double psi1, double psi2, double log_delta, double phi, double A);

/// f_k(x) = sum over eligible atoms, nearest first, of K(x, theta) * p_i(x).
/// Returns 0 when no atom lies in U(x).
double f_eval(const SpaceTimePoint& x, const SiteKernel& site, const VariableState& var,
              double tau);

/// f at every data row using that row's field values.
std::vector<double> f_values(const Dataset& data, const VariableState& var,
                             const FixedState& fixed, double A);

/// Gaussian log likelihood; mean_i = f_i, or alpha0 + alpha1 x_i + f_i with a covariate.
double log_likelihood(const Dataset& data, const std::vector<double>& f, double sigma,
                      std::optional<std::pair<double, double>> regression = std::nullopt);

/// Inverted-Beta prior n0^eta Gamma(2 eta) alpha^{eta-1} / (Gamma(eta)^2 (alpha+n0)^{2 eta}).
double log_prior_alpha(double alpha, double n0, double eta);

/// Log-normal prior with location log(alpha) and log-variance b_lambda.
double log_prior_lambda(double lambda, double alpha, double b_lambda);

/// Sum of every prior term; -inf outside the support.
double log_prior_all(const VariableState& var, const FixedState& fixed, const ModelContext& ctx);

double log_posterior(const VariableState& var, const FixedState& fixed, const ModelContext& ctx);

/// Prior draw of the variable block with k atoms (used for initialisation and
/// prior-predictive checks).
VariableState sample_variable_prior(std::size_t k, double alpha, const ModelContext& ctx,
                                    Rng& rng);

}  // namespace kcoddp::model

namespace kcoddp::model {

/// Context whose box is the data range padded by the region margin at
/// (alpha, lambda, epsilon). The box stays fixed for the life of the context.
ModelContext make_context(Dataset data, const Hyper& hyper, double alpha, double lambda,
                          double epsilon);

}  // namespace kcoddp::model
