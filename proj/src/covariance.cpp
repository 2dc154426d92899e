#include "kcoddp/covariance.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

#include "kcoddp/error.hpp"

namespace kcoddp::covariance {

void RunningStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double RunningStats::std_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

namespace {

// Overlap of two orderings of possibly different lengths, every position counted.
OverlapSets overlap_all(const Ordering& ord1, std::size_t len1, const Ordering& ord2,
                        std::size_t len2) {
  std::unordered_map<std::size_t, std::size_t> pos2;
  for (std::size_t j = 0; j < len2; ++j) pos2.emplace(ord2[j], j);

  OverlapSets out;
  for (std::size_t i = 0; i < len1; ++i) {
    const auto it = pos2.find(ord1[i]);
    if (it == pos2.end()) continue;
    const std::size_t j = it->second;
    // |A1 ∩ A2|: atoms before position i in ord1 whose ord2 position is < j.
    std::size_t both = 0;
    for (std::size_t a = 0; a < i; ++a) {
      const auto p = pos2.find(ord1[a]);
      if (p != pos2.end() && p->second < j) ++both;
    }
    out.shared.push_back(ord1[i]);
    out.s_size.push_back(both);
    out.sprime_size.push_back((i - both) + (j - both));
  }
  return out;
}

}  // namespace

OverlapSets overlap_sets(const Ordering& ord1, const Ordering& ord2, std::size_t depth) {
  require(depth <= ord1.size() && depth <= ord2.size(), "overlap_sets: depth exceeds ordering");
  return overlap_all(ord1, depth, ord2, depth);
}

double corr_G(double alpha, const OverlapSets& sets) {
  require(alpha > 0.0, "corr_G: alpha must be positive");
  require(sets.s_size.size() == sets.shared.size() &&
              sets.sprime_size.size() == sets.shared.size(),
          "corr_G: malformed overlap sets");
  const double r2 = alpha / (alpha + 2.0);
  const double r1 = alpha / (alpha + 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < sets.shared.size(); ++i)
    sum += std::pow(r2, static_cast<double>(sets.s_size[i])) *
           std::pow(r1, static_cast<double>(sets.sprime_size[i]));
  double value = 2.0 / (alpha + 2.0) * sum;
  // Tail atoms at positions m, m+1, ... have #S = position, #S' = 0; the
  // geometric series times the prefactor collapses to r2^m.
  if (sets.identical_tail_from)
    value += std::pow(r2, static_cast<double>(*sets.identical_tail_from));
  return value;
}

double corr_G_tail_bound(double alpha, std::size_t depth) {
  require(alpha > 0.0, "corr_G_tail_bound: alpha must be positive");
  // A shared atom at ord1 position i >= depth has #S + #S' >= i, and each
  // term is at most (alpha/(alpha+1))^{#S + #S'}.
  return 2.0 / (alpha + 2.0) * (alpha + 1.0) *
         std::pow(alpha / (alpha + 1.0), static_cast<double>(depth));
}

double corr_G_normalized(double alpha, const Ordering& ord1, const Ordering& ord2) {
  if (ord1.empty() || ord2.empty()) return 0.0;
  if (ord1 == ord2) return 1.0;
  const double r2 = alpha / (alpha + 2.0);
  // Self-overlap of an ordering of length m: 1 - r2^m.
  const double self1 = 1.0 - std::pow(r2, static_cast<double>(ord1.size()));
  const double self2 = 1.0 - std::pow(r2, static_cast<double>(ord2.size()));
  const auto sets = overlap_all(ord1, ord1.size(), ord2, ord2.size());
  return corr_G(alpha, sets) / std::sqrt(self1 * self2);
}

double KernelMoments::corr_g0() const {
  const double v1 = E_K1sq - E_K1 * E_K1;
  const double v2 = E_K2sq - E_K2 * E_K2;
  if (!(v1 > 0.0) || !(v2 > 0.0)) return 0.0;
  return cov_g0() / std::sqrt(v1 * v2);
}

Eigen::Matrix2d g0_covariance(double rho) {
  require(std::fabs(rho) < 1.0, "G0 correlation must lie in (-1, 1)");
  Eigen::Matrix2d R;
  R << 1.0, rho, rho, 1.0;
  return R;
}

namespace {

double eval_site(const KernelSite& k, const Eigen::Vector2d& theta) {
  return kernel::kernel_eval(k.x, theta, k.tau, k.sigma_half, k.delta);
}

// E over theta ~ N(0, R) of prod_j c_j exp(-1/2 (theta - s_j)^T S_j (theta - s_j)).
double gaussian_product_moment(const std::vector<const KernelSite*>& sites,
                               const Eigen::Matrix2d& R) {
  const Eigen::Matrix2d Rinv = R.inverse();
  Eigen::Matrix2d P = Rinv;
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  double c0 = 0.0;
  double log_c = 0.0;
  for (const auto* k : sites) {
    const Eigen::Matrix2d S = k->sigma_half.sigma();
    const Eigen::Vector2d s(k->x.s1, k->x.s2);
    P += S;
    b += S * s;
    c0 += s.dot(S * s);
    log_c += -k->delta * std::fabs(k->x.t - k->tau);
  }
  const double quad = c0 - b.dot(P.ldlt().solve(b));
  return std::exp(log_c - 0.5 * std::log(R.determinant()) - 0.5 * std::log(P.determinant()) -
                  0.5 * quad);
}

}  // namespace

KernelMoments kernel_moments_G0(const KernelSite& k1, const KernelSite& k2, double rho,
                                std::size_t n_mc, Rng& rng) {
  require(n_mc >= 1, "kernel_moments_G0: n_mc must be >= 1");
  const Eigen::Matrix2d L = g0_covariance(rho).llt().matrixL();
  RunningStats m1, m2, m12, m11, m22, mc;
  std::vector<double> a(n_mc), b(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    const Eigen::Vector2d z(rng.normal(), rng.normal());
    const Eigen::Vector2d theta = L * z;
    a[i] = eval_site(k1, theta);
    b[i] = eval_site(k2, theta);
    m1.add(a[i]);
    m2.add(b[i]);
    m12.add(a[i] * b[i]);
    m11.add(a[i] * a[i]);
    m22.add(b[i] * b[i]);
  }
  for (std::size_t i = 0; i < n_mc; ++i) mc.add((a[i] - m1.mean()) * (b[i] - m2.mean()));
  KernelMoments out;
  out.E_K1 = m1.mean();
  out.E_K2 = m2.mean();
  out.E_K1K2 = m12.mean();
  out.E_K1sq = m11.mean();
  out.E_K2sq = m22.mean();
  out.se_K1 = m1.std_error();
  out.se_K2 = m2.std_error();
  out.se_K1K2 = m12.std_error();
  out.se_cov = mc.std_error();
  return out;
}

KernelMoments kernel_moments_exact(const KernelSite& k1, const KernelSite& k2, double rho) {
  const Eigen::Matrix2d R = g0_covariance(rho);
  KernelMoments out;
  out.E_K1 = gaussian_product_moment({&k1}, R);
  out.E_K2 = gaussian_product_moment({&k2}, R);
  out.E_K1K2 = gaussian_product_moment({&k1, &k2}, R);
  out.E_K1sq = gaussian_product_moment({&k1, &k1}, R);
  out.E_K2sq = gaussian_product_moment({&k2, &k2}, R);
  return out;
}

double conditional_cov_f(double alpha, const OverlapSets& sets, const KernelMoments& moments) {
  return moments.cov_g0() * corr_G(alpha, sets) / (alpha + 1.0);
}

namespace {

Estimate ordering_factor_mc(const SpaceTimePoint& x1, const SpaceTimePoint& x2, double alpha,
                            double lambda, const geometry::ComputationalBox& box,
                            std::size_t n_configs, const Rng& rng, geometry::RelevantSet mode) {
  require(n_configs >= 1, "n_configs must be >= 1");
  require(alpha > 0.0 && lambda > 0.0, "alpha and lambda must be positive");
  RunningStats stats;
  for (std::size_t c = 0; c < n_configs; ++c) {
    Rng stream = rng.derive(c);
    const auto config = geometry::sample_poisson_configuration(box, lambda, stream);
    const auto o1 = geometry::compute_ordering(x1, config, mode);
    const auto o2 = geometry::compute_ordering(x2, config, mode);
    stats.add(corr_G_normalized(alpha, o1, o2));
  }
  return {stats.mean(), stats.std_error()};
}

}  // namespace

Estimate unconditional_corr_mc(const SpaceTimePoint& x1, const SpaceTimePoint& x2, double alpha,
                               double lambda, const geometry::ComputationalBox& box,
                               const KernelMoments& moments, std::size_t n_configs, const Rng& rng,
                               geometry::RelevantSet mode) {
  const auto g = ordering_factor_mc(x1, x2, alpha, lambda, box, n_configs, rng, mode);
  const double kc = x1 == x2 ? 1.0 : moments.corr_g0();
  return {g.estimate * kc, g.std_error * std::fabs(kc)};
}

Estimate separability_mode_corr(const SpaceTimePoint& x1, const SpaceTimePoint& x2,
                                SeparableMode mode, double alpha, double lambda,
                                const geometry::ComputationalBox& box,
                                const KernelCorrelation& kernel_corr, std::size_t n_configs,
                                const Rng& rng) {
  const auto ordering_mode = mode == SeparableMode::space_kernel_time_ordering
                                 ? geometry::RelevantSet::temporal
                                 : geometry::RelevantSet::spatial;
  const auto g = ordering_factor_mc(x1, x2, alpha, lambda, box, n_configs, rng, ordering_mode);
  const double kc = kernel_corr(x1, x2);
  return {g.estimate * kc, g.std_error * std::fabs(kc)};
}

}  // namespace kcoddp::covariance
