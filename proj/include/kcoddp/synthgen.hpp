#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "kcoddp/model.hpp"
#include "kcoddp/rng.hpp"

namespace kcoddp::synthgen {

struct GaussianSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  void validate() const;
};

/// Draw mean + P^T L sqrt(D) z from the pivoted LDL^T factorization of cov;
/// tiny negative pivots from round-off are clamped to zero.
Eigen::VectorXd mvn_sample(const GaussianSpec& spec, Rng& rng);

/// Law of the first `n_first` components given the rest equal `observed`:
/// mean mu1 + A12 A22^{-1} (x2 - mu2), covariance A11 - A12 A22^{-1} A21.
GaussianSpec gp_conditional(const GaussianSpec& joint, std::size_t n_first,
                            const Eigen::VectorXd& observed);

struct SyntheticOptions {
  std::size_t n_grid = 100;
  std::size_t n_holdout = 5;
  double box_side = 50.0;
  std::array<double, 3> beta{0.1, 0.01, 0.02};  // coefficients of (t, s1, s2)
};

struct SyntheticData {
  model::Dataset data;                          // the n_grid - n_holdout observed points
  std::vector<model::SpaceTimePoint> holdout;   // omitted design points
  Eigen::VectorXd x_holdout;                    // latent process at the omitted points
  Eigen::VectorXd x_observed;                   // latent process at the observed points
  Eigen::MatrixXd y_cov;                        // covariance used for y
};

/// exp(-0.5 * Euclidean distance in (t, s1, s2)), unit diagonal.
Eigen::MatrixXd exponential_covariance(const std::vector<model::SpaceTimePoint>& a,
                                       const std::vector<model::SpaceTimePoint>& b);

SyntheticData generate_synthetic(std::uint64_t seed, const SyntheticOptions& options = {});

}  // namespace kcoddp::synthgen
