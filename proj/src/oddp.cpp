#include "kcoddp/oddp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kcoddp/error.hpp"

namespace kcoddp::oddp {

namespace {

void check_alpha(double alpha) {
  require(alpha > 0.0 && std::isfinite(alpha), "alpha must be finite and positive");
}

}  // namespace

std::vector<double> weights_for_ordering(const StickState& stick,
                                         const geometry::Ordering& ordering, std::size_t k) {
  if (k > ordering.size())
    throw BoundsError("weights_for_ordering: k=" + std::to_string(k) + " exceeds ordering length " +
                      std::to_string(ordering.size()));
  std::vector<double> p(k);
  double remaining = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto atom = ordering[i];
    if (atom >= stick.V.size())
      throw BoundsError("weights_for_ordering: ordering references atom " + std::to_string(atom) +
                        " but only " + std::to_string(stick.V.size()) + " fractions exist");
    p[i] = stick.V[atom] * remaining;
    remaining *= 1.0 - stick.V[atom];
  }
  return p;
}

std::vector<double> stick_weights(const std::vector<double>& fractions) {
  std::vector<double> p(fractions.size());
  double remaining = 1.0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    p[i] = fractions[i] * remaining;
    remaining *= 1.0 - fractions[i];
  }
  return p;
}

double tail_moment_T(std::size_t N, std::size_t r, double alpha) {
  check_alpha(alpha);
  require(N >= 1 && r >= 1, "tail_moment_T: N and r must be >= 1");
  return std::exp(static_cast<double>(N - 1) * std::log(alpha / (alpha + static_cast<double>(r))));
}

double tail_moment_U(std::size_t N, std::size_t r, double alpha) {
  check_alpha(alpha);
  require(N >= 1 && r >= 1, "tail_moment_U: N and r must be >= 1");
  const double rr = static_cast<double>(r);
  const double log_gamma_ratio = std::lgamma(rr) + std::lgamma(alpha + 1.0) - std::lgamma(alpha + rr);
  return std::exp(static_cast<double>(N - 1) * std::log(alpha / (alpha + rr)) + log_gamma_ratio);
}

double truncation_bound(const TruncationBoundInput& in) {
  check_alpha(in.alpha);
  require(in.M > 0.0 && std::isfinite(in.M), "truncation_bound: M must be positive");
  require(in.n >= 1 && in.N >= 1, "truncation_bound: n and N must be >= 1");
  const double n = static_cast<double>(in.n);
  const double N = static_cast<double>(in.N);
  const double quad = 4.0 * in.M * in.M * n * std::pow(in.alpha / (in.alpha + 2.0), N);
  const double lin =
      2.0 * std::sqrt(2.0 / std::numbers::pi) * in.M * n * std::pow(in.alpha / (in.alpha + 1.0), N);
  return quad + lin;
}

std::size_t smallest_N_for_bound(double M, std::size_t n, double alpha, double tolerance) {
  require(tolerance > 0.0, "smallest_N_for_bound: tolerance must be positive");
  // Both terms are geometric in N, so the scan terminates; jump ahead with a
  // log estimate of the linear term, then step back to the exact first N.
  TruncationBoundInput in{M, n, alpha, 1};
  if (truncation_bound(in) <= tolerance) return 1;
  const double lead = 2.0 * std::sqrt(2.0 / std::numbers::pi) * M * static_cast<double>(n) +
                      4.0 * M * M * static_cast<double>(n);
  const double guess = std::log(tolerance / lead) / std::log(alpha / (alpha + 1.0));
  std::size_t hi = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(guess)));
  in.N = hi;
  while (truncation_bound(in) > tolerance) in.N = hi *= 2;
  std::size_t lo = 1;  // bound(lo) > tolerance, bound(hi) <= tolerance
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    in.N = mid;
    if (truncation_bound(in) <= tolerance) hi = mid; else lo = mid;
  }
  return hi;
}

std::vector<double> sample_sticks(double alpha, std::size_t K, Rng& rng) {
  check_alpha(alpha);
  std::vector<double> V(K);
  for (auto& v : V) v = rng.beta_one(alpha);
  return V;
}

}  // namespace kcoddp::oddp
