#include "kcoddp/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "kcoddp/error.hpp"
#include "kcoddp/kernel.hpp"
#include "kcoddp/linalg.hpp"

namespace kcoddp::ttmcmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum Fixed : std::size_t { kPhi, kADelta, kBPsi, kAlpha, kLambda, kTau, kSigma, kAlpha0, kAlpha1 };

Eigen::Map<const Eigen::VectorXd> as_vec(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double or_block(double split, double block) { return split > 0.0 ? split : block; }

}  // namespace

ModelTarget::ModelTarget(const model::ModelContext& ctx) : ctx_(&ctx) {}

std::size_t ModelTarget::n_fixed() const { return field_offset() + 3 * ctx_->data.size(); }

TransState ModelTarget::to_transformed(const model::VariableState& var,
                                       const model::FixedState& fx) const {
  const auto& box = ctx_->box;
  TransState x;
  x.blocks.assign(kBlocks, {});
  for (std::size_t i = 0; i < var.k(); ++i) {
    x.blocks[0].push_back(std::log(var.V[i]));
    for (std::size_t d = 0; d < 3; ++d)
      x.blocks[1 + d].push_back(
          std::log((var.z[i][d] - box.lower[d]) / (box.upper[d] - box.lower[d])));
    x.blocks[4].push_back(var.theta1[i]);
    x.blocks[5].push_back(var.theta2[i]);
  }
  x.fixed = {fx.phi, fx.a_delta, fx.b_psi, fx.alpha, fx.lambda, fx.tau, fx.sigma};
  if (ctx_->data.regression()) {
    x.fixed.push_back(fx.alpha0);
    x.fixed.push_back(fx.alpha1);
  }
  const linalg::JitteredCholesky lp(kernel::gp_covariance_psi(ctx_->locations, fx.b_psi));
  const linalg::JitteredCholesky ld(kernel::gp_covariance_delta(ctx_->times, fx.a_delta));
  for (const auto& w : {lp.whiten(as_vec(fx.psi1)), lp.whiten(as_vec(fx.psi2)),
                        ld.whiten(as_vec(fx.log_delta))})
    x.fixed.insert(x.fixed.end(), w.data(), w.data() + w.size());
  return x;
}

bool ModelTarget::to_natural(const TransState& x, model::VariableState& var,
                             model::FixedState& fx) const {
  const auto& box = ctx_->box;
  const auto& h = ctx_->hyper;
  const std::size_t k = x.k();
  const std::size_t n = ctx_->data.size();
  require(x.blocks.size() == kBlocks && x.fixed.size() == n_fixed(),
          "model target: state has the wrong shape");
  var = {};
  for (std::size_t i = 0; i < k; ++i) {
    if (!(x.blocks[0][i] < 0.0)) return false;
    var.V.push_back(std::exp(x.blocks[0][i]));
    model::SpaceTimePoint z;
    for (std::size_t d = 0; d < 3; ++d) {
      const double zs = x.blocks[1 + d][i];
      if (!(zs < 0.0)) return false;
      z[d] = box.lower[d] + (box.upper[d] - box.lower[d]) * std::exp(zs);
    }
    var.z.push_back(z);
    var.theta1.push_back(x.blocks[4][i]);
    var.theta2.push_back(x.blocks[5][i]);
  }
  const auto& f = x.fixed;
  fx.phi = f[kPhi];
  fx.a_delta = f[kADelta];
  fx.b_psi = f[kBPsi];
  fx.alpha = f[kAlpha];
  fx.lambda = f[kLambda];
  fx.tau = f[kTau];
  fx.sigma = f[kSigma];
  if (ctx_->data.regression()) {
    fx.alpha0 = f[kAlpha0];
    fx.alpha1 = f[kAlpha1];
  }
  // The field covariances are only defined inside the prior support.
  for (const double u : {fx.a_delta, fx.b_psi})
    if (!(u > h.uniform_lo && u < h.uniform_hi)) return false;
  const std::size_t off = field_offset();
  const Eigen::Map<const Eigen::VectorXd> w1(f.data() + off, static_cast<Eigen::Index>(n));
  const Eigen::Map<const Eigen::VectorXd> w2(f.data() + off + n, static_cast<Eigen::Index>(n));
  const Eigen::Map<const Eigen::VectorXd> w3(f.data() + off + 2 * n, static_cast<Eigen::Index>(n));
  const linalg::JitteredCholesky lp(kernel::gp_covariance_psi(ctx_->locations, fx.b_psi));
  const linalg::JitteredCholesky ld(kernel::gp_covariance_delta(ctx_->times, fx.a_delta));
  fx.psi1 = to_std(lp.L * w1);
  fx.psi2 = to_std(lp.L * w2);
  fx.log_delta = to_std(ld.L * w3);
  return true;
}

double ModelTarget::log_density(const TransState& x) const {
  model::VariableState var;
  model::FixedState fx;
  if (!to_natural(x, var, fx)) return kNegInf;
  const double lp = model::log_posterior(var, fx, *ctx_);
  if (!std::isfinite(lp)) return kNegInf;
  // d V / d V* = V; d z / d z* = z - lower; d psi / d omega = L.
  double log_jac = 0.0;
  for (std::size_t i = 0; i < var.k(); ++i) {
    log_jac += x.blocks[0][i];
    for (std::size_t d = 0; d < 3; ++d) log_jac += std::log(var.z[i][d] - ctx_->box.lower[d]);
  }
  const linalg::JitteredCholesky lpsi(kernel::gp_covariance_psi(ctx_->locations, fx.b_psi));
  const linalg::JitteredCholesky ldel(kernel::gp_covariance_delta(ctx_->times, fx.a_delta));
  // log det L is half the log determinant; psi contributes two fields.
  log_jac += lpsi.log_det() + 0.5 * ldel.log_det();
  return lp + log_jac;
}

MoveScales ModelTarget::move_scales(const ModelScales& s) const {
  MoveScales m;
  m.block = {s.V, s.z, s.z, s.z, s.theta1, s.theta2};
  m.split = {or_block(s.split_V, s.V),           or_block(s.split_z, s.z),
             or_block(s.split_z, s.z),           or_block(s.split_z, s.z),
             or_block(s.split_theta1, s.theta1), or_block(s.split_theta2, s.theta2)};
  m.fixed = {s.phi, s.a_delta, s.b_psi, s.alpha, s.lambda, s.tau, s.sigma};
  if (ctx_->data.regression()) {
    m.fixed.push_back(s.alpha0);
    m.fixed.push_back(s.alpha1);
  }
  const std::size_t n = ctx_->data.size();
  m.fixed.insert(m.fixed.end(), n, s.psi1);
  m.fixed.insert(m.fixed.end(), n, s.psi2);
  m.fixed.insert(m.fixed.end(), n, s.delta);
  return m;
}

ChainState initial_state(const ModelTarget& target, const ChainConfig& config, Rng& rng) {
  const auto& ctx = target.context();
  const std::size_t n = ctx.data.size();
  require(config.k_init >= 1 && config.k_init <= ctx.hyper.k_max, "k_init must lie in [1, k_max]");
  model::FixedState fx;
  fx.phi = config.phi_init;
  fx.a_delta = config.a_delta_init;
  fx.b_psi = config.b_psi_init;
  fx.alpha = config.alpha_init;
  fx.lambda = config.lambda_init;
  fx.tau = config.tau_init;
  fx.sigma = config.sigma_init;
  fx.psi1.assign(n, 0.0);
  fx.psi2.assign(n, 0.0);
  fx.log_delta.assign(n, 0.0);
  if (ctx.data.regression()) {
    // ordinary least squares of y on the covariate
    const auto& x = *ctx.data.covariate;
    const auto& y = ctx.data.y;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    fx.alpha1 = sxx > 0.0 ? sxy / sxx : 0.0;
    fx.alpha0 = my - fx.alpha1 * mx;
  }
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto var = model::sample_variable_prior(config.k_init, fx.alpha, ctx, rng);
    ChainState s{target.to_transformed(var, fx), 0.0};
    s.log_post = target.log_density(s.x);
    if (std::isfinite(s.log_post)) return s;
  }
  throw NumericalError("initial_state: no starting point with finite posterior");
}

SampleArchive run_chain(const model::ModelContext& ctx, const ChainConfig& config, Rng rng,
                        std::size_t chain_id) {
  require(config.n_iter > config.burn_in, "run: n_iter must exceed burn_in");
  require(config.thin >= 1, "run: thin must be >= 1");
  const ModelTarget target(ctx);
  const Sampler sampler([&target](const TransState& x) { return target.log_density(x); },
                        target.move_scales(config.scales), config.weights, ctx.hyper.k_max);
  ChainState state = initial_state(target, config, rng);

  SampleArchive archive;
  archive.chain_id = chain_id;
  archive.k_trace.reserve(config.n_iter);
  for (std::size_t it = 0; it < config.n_iter; ++it) {
    const StepResult r = sampler.step(state, rng);
    archive.counts.record(r);
    if (it >= config.burn_in) archive.counts_kept.record(r);
    archive.k_trace.push_back(state.x.k());
    if (it >= config.burn_in && (it - config.burn_in) % config.thin == 0) {
      SampleRow row;
      row.iter = it;
      target.to_natural(state.x, row.var, row.fixed);
      row.log_post = state.log_post;
      archive.rows.push_back(std::move(row));
    }
  }
  return archive;
}

std::vector<SampleArchive> run_chains(const model::ModelContext& ctx, const ChainConfig& config,
                                      std::size_t n_chains, std::uint64_t seed,
                                      std::size_t n_threads) {
  require(n_chains >= 1, "run_chains: need at least one chain");
  const Rng master(seed);
  std::vector<SampleArchive> out(n_chains);
  std::vector<std::exception_ptr> errors(n_chains);
  const auto work = [&](std::size_t c) {
    try {
      out[c] = run_chain(ctx, config, master.derive(c), c);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (n_threads <= 1) {
    for (std::size_t c = 0; c < n_chains; ++c) work(c);
  } else {
    for (std::size_t start = 0; start < n_chains; start += n_threads) {
      std::vector<std::thread> pool;
      for (std::size_t c = start; c < std::min(n_chains, start + n_threads); ++c)
        pool.emplace_back(work, c);
      for (auto& t : pool) t.join();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace kcoddp::ttmcmc
