#pragma once

#include <cstddef>
#include <vector>

#include "kcoddp/geometry.hpp"
#include "kcoddp/rng.hpp"

namespace kcoddp::oddp {

/// Stick-breaking fractions V_i ~ Beta(1, alpha), indexed by atom.
struct StickState {
  std::vector<double> V;
  double alpha = 1.0;
};

struct TruncationBoundInput {
  double M = 1.0;       // sup of the kernel over theta
  std::size_t n = 1;    // number of observations
  double alpha = 1.0;
  std::size_t N = 1;    // truncation level
};

/// p_i(x) = V_{pi_i} prod_{j<i} (1 - V_{pi_j}) for the first k positions of the ordering.
std::vector<double> weights_for_ordering(const StickState& stick,
                                         const geometry::Ordering& ordering, std::size_t k);

/// Same product over raw fractions already arranged in ordering position.
std::vector<double> stick_weights(const std::vector<double>& fractions);

/// E[(sum_{k>=N} p_k)^r] = (alpha/(alpha+r))^{N-1}.
double tail_moment_T(std::size_t N, std::size_t r, double alpha);

/// E[sum_{k>=N} p_k^r] = (alpha/(alpha+r))^{N-1} Gamma(r)Gamma(alpha+1)/Gamma(alpha+r).
double tail_moment_U(std::size_t N, std::size_t r, double alpha);

/// L1 bound between the N-truncated and the infinite data marginal.
double truncation_bound(const TruncationBoundInput& input);

/// Smallest N >= 1 with truncation_bound(M, n, alpha, N) <= tolerance.
std::size_t smallest_N_for_bound(double M, std::size_t n, double alpha, double tolerance);

/// K iid Beta(1, alpha) fractions.
std::vector<double> sample_sticks(double alpha, std::size_t K, Rng& rng);

}  // namespace kcoddp::oddp
