#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kcoddp/geometry.hpp"
#include "kcoddp/kernel.hpp"
#include "kcoddp/rng.hpp"

namespace kcoddp::covariance {

using geometry::Ordering;
using geometry::SpaceTimePoint;

/// Shared-atom bookkeeping for two orderings. For each atom k present in
/// both, S_k is the set of atoms preceding k in both orderings and S'_k those
/// preceding it in exactly one.
struct OverlapSets {
  std::vector<std::size_t> shared;
  std::vector<std::size_t> s_size;
  std::vector<std::size_t> sprime_size;
  /// When set, the two orderings continue identically and indefinitely from
  /// this position on (all earlier atoms precede every tail atom in both).
  std::optional<std::size_t> identical_tail_from;
};

OverlapSets overlap_sets(const Ordering& ord1, const Ordering& ord2, std::size_t depth);

/// (2/(alpha+2)) sum_k (alpha/(alpha+2))^{#S_k} (alpha/(alpha+1))^{#S'_k},
/// including the closed-form contribution of an identical tail.
double corr_G(double alpha, const OverlapSets& sets);

/// Upper bound on what corr_G omits when the orderings are cut at `depth`.
double corr_G_tail_bound(double alpha, std::size_t depth);

/// corr_G of two finite orderings, normalised by the self-overlap of each so
/// that identical orderings give exactly 1 whatever their length.
double corr_G_normalized(double alpha, const Ordering& ord1, const Ordering& ord2);

/// Kernel evaluated at one point: temporal factor exp(-delta|t - tau|) times a
/// Gaussian in the spatial coordinates with precision Sigma = m^T m.
struct KernelSite {
  SpaceTimePoint x;
  kernel::AnisotropyMatrix sigma_half;
  double delta = 1.0;
  double tau = 0.0;
};

/// G0 moments of K(x1, theta) and K(x2, theta).
struct KernelMoments {
  double E_K1 = 0.0;
  double E_K2 = 0.0;
  double E_K1K2 = 0.0;
  double E_K1sq = 0.0;
  double E_K2sq = 0.0;
  // Monte Carlo standard errors (zero for exact moments)
  double se_K1 = 0.0;
  double se_K2 = 0.0;
  double se_K1K2 = 0.0;
  double se_cov = 0.0;  // standard error of cov_g0()

  double cov_g0() const { return E_K1K2 - E_K1 * E_K2; }
  double corr_g0() const;
};

/// Bivariate normal G0 with unit variances and correlation rho.
Eigen::Matrix2d g0_covariance(double rho);

/// Monte Carlo moments over theta ~ G0.
KernelMoments kernel_moments_G0(const KernelSite& k1, const KernelSite& k2, double rho,
                                std::size_t n_mc, Rng& rng);

/// The same moments in closed form (Gaussian integrals).
KernelMoments kernel_moments_exact(const KernelSite& k1, const KernelSite& k2, double rho);

/// Cov(f(x1), f(x2) | orderings) = Cov_G0(K1, K2) corr_G / (alpha + 1).
double conditional_cov_f(double alpha, const OverlapSets& sets, const KernelMoments& moments);

struct Estimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Mean of corr_G over Poisson configurations in `box` (one derived stream per
/// configuration), times Corr_G0(K1, K2).
Estimate unconditional_corr_mc(const SpaceTimePoint& x1, const SpaceTimePoint& x2, double alpha,
                               double lambda, const geometry::ComputationalBox& box,
                               const KernelMoments& moments, std::size_t n_configs, const Rng& rng,
                               geometry::RelevantSet mode = geometry::RelevantSet::spacetime);

enum class SeparableMode {
  space_kernel_time_ordering,
  time_kernel_space_ordering,
};

/// Kernel correlation factor Corr_G0(K(x1, .), K(x2, .)) of the separable kernel.
using KernelCorrelation = std::function<double(const SpaceTimePoint&, const SpaceTimePoint&)>;

/// Separable evaluation: the kernel factor depends on one coordinate group and
/// the ordering on the other.
Estimate separability_mode_corr(const SpaceTimePoint& x1, const SpaceTimePoint& x2,
                                SeparableMode mode, double alpha, double lambda,
                                const geometry::ComputationalBox& box,
                                const KernelCorrelation& kernel_corr, std::size_t n_configs,
                                const Rng& rng);

/// Running mean and variance (Welford).
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace kcoddp::covariance
