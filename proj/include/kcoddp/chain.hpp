#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kcoddp/model.hpp"
#include "kcoddp/rng.hpp"
#include "kcoddp/ttmcmc.hpp"

namespace kcoddp::ttmcmc {

/// Additive scales of the model's coordinates. A split scale <= 0 means
/// "same as the block scale".
struct ModelScales {
  double V = 0.1, z = 0.1, theta1 = 0.1, theta2 = 0.1;
  double split_V = -1.0, split_z = -1.0, split_theta1 = -1.0, split_theta2 = -1.0;
  double phi = 0.1, a_delta = 0.1, b_psi = 0.1;
  double alpha = 0.1, lambda = 0.1, tau = 0.1, sigma = 0.1;
  double psi1 = 0.1, psi2 = 0.1, delta = 0.1;
  double alpha0 = 0.1, alpha1 = 0.1;
};

struct ChainConfig {
  std::size_t n_iter = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::size_t k_init = 5;
  ModelScales scales;
  MoveWeights weights;
  // starting values of the fixed block
  double phi_init = 5.0;
  double a_delta_init = 10.0;
  double b_psi_init = 10.0;
  double alpha_init = 1.0;
  double lambda_init = 5.0;
  double tau_init = 0.0;
  double sigma_init = 1.0;
};

/// Maps the model's parameters onto sampler coordinates and back.
///
/// Variable blocks: log V, the three z* = log((z - lower)/(upper - lower)),
/// theta1, theta2. Fixed block: phi, a_delta, b_psi, alpha, lambda, tau,
/// sigma, [alpha0, alpha1], then the whitened field coordinates omega with
/// psi1 = L omega1, psi2 = L omega2 (L the Cholesky factor of the psi
/// covariance at b_psi) and log_delta = L_delta omega3.
class ModelTarget {
 public:
  static constexpr std::size_t kBlocks = 6;

  explicit ModelTarget(const model::ModelContext& ctx);

  std::size_t n_fixed() const;
  /// Index of the first whitened coordinate of psi1 (psi2 and log_delta follow).
  std::size_t field_offset() const { return ctx_->data.regression() ? 9 : 7; }

  TransState to_transformed(const model::VariableState& var, const model::FixedState& fixed) const;

  /// False when the coordinates fall outside the parameter support.
  bool to_natural(const TransState& x, model::VariableState& var, model::FixedState& fixed) const;

  /// log posterior plus the log Jacobian of the coordinate change.
  double log_density(const TransState& x) const;

  MoveScales move_scales(const ModelScales& s) const;

  const model::ModelContext& context() const { return *ctx_; }

 private:
  const model::ModelContext* ctx_;
};

struct SampleRow {
  std::size_t iter = 0;
  model::VariableState var;
  model::FixedState fixed;
  double log_post = 0.0;  // log target in sampler coordinates
};

struct SampleArchive {
  std::size_t chain_id = 0;
  std::vector<SampleRow> rows;
  AcceptanceCounts counts;       // every iteration
  AcceptanceCounts counts_kept;  // after burn-in only
  std::vector<std::size_t> k_trace;  // k after every iteration, burn-in included
};

/// Starting state: prior draws for the atoms, config values for the fixed
/// block, zero fields, least-squares regression coefficients.
ChainState initial_state(const ModelTarget& target, const ChainConfig& config, Rng& rng);

/// One chain on `rng`'s stream.
SampleArchive run_chain(const model::ModelContext& ctx, const ChainConfig& config, Rng rng,
                        std::size_t chain_id = 0);

/// Chain c uses stream Rng(seed).derive(c); results do not depend on n_threads.
std::vector<SampleArchive> run_chains(const model::ModelContext& ctx, const ChainConfig& config,
                                      std::size_t n_chains, std::uint64_t seed,
                                      std::size_t n_threads = 1);

}  // namespace kcoddp::ttmcmc
