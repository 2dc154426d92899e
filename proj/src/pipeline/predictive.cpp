#include "kcoddp/pipeline/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "kcoddp/error.hpp"
#include "kcoddp/kernel.hpp"
#include "kcoddp/synthgen.hpp"

namespace kcoddp::pipeline {

double quantile_type7(const std::vector<double>& sorted, double p) {
  require(!sorted.empty(), "quantile: no data");
  require(p >= 0.0 && p <= 1.0, "quantile: p must lie in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

PredictiveSummary summarize_draws(std::vector<double> draws, double level) {
  require(!draws.empty(), "summarize_draws: no draws");
  require(level > 0.0 && level < 1.0, "summarize_draws: level must lie in (0, 1)");
  std::sort(draws.begin(), draws.end());
  PredictiveSummary s;
  const auto n = static_cast<double>(draws.size());
  s.n_draws = draws.size();
  s.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
  s.median = quantile_type7(draws, 0.5);
  s.lower = quantile_type7(draws, 0.5 * (1.0 - level));
  s.upper = quantile_type7(draws, 0.5 * (1.0 + level));

  const double lo = draws.front(), hi = draws.back();
  double pad = 0.1 * (hi - lo);
  if (pad <= 0.0) pad = 0.1 * std::max(1.0, std::fabs(lo));
  double var = 0.0;
  for (const double d : draws) var += (d - s.mean) * (d - s.mean);
  const double sd = draws.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  double bw = 1.06 * sd * std::pow(n, -0.2);
  if (!(bw > 0.0)) bw = (hi - lo + 2.0 * pad) / static_cast<double>(kDensityGridPoints);
  s.grid.resize(kDensityGridPoints);
  s.density.resize(kDensityGridPoints);
  const double step = (hi - lo + 2.0 * pad) / static_cast<double>(kDensityGridPoints - 1);
  const double norm = 1.0 / (n * bw * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < kDensityGridPoints; ++g) {
    const double x = lo - pad + step * static_cast<double>(g);
    double acc = 0.0;
    for (const double d : draws) {
      const double u = (x - d) / bw;
      acc += std::exp(-0.5 * u * u);
    }
    s.grid[g] = x;
    s.density[g] = acc * norm;
  }
  return s;
}

namespace {

// Conditional draw of a zero-mean field at x given its values at the sites.
double conditional_field_draw(const Eigen::MatrixXd& joint_cov, const std::vector<double>& values,
                              Rng& rng) {
  synthgen::GaussianSpec joint;
  joint.mean = Eigen::VectorXd::Zero(joint_cov.rows());
  joint.cov = joint_cov;
  const Eigen::Map<const Eigen::VectorXd> obs(values.data(), static_cast<Eigen::Index>(values.size()));
  const auto cond = synthgen::gp_conditional(joint, 1, obs);
  const double sd = std::sqrt(std::max(cond.cov(0, 0), 0.0));
  return cond.mean[0] + sd * rng.normal();
}

}  // namespace

PredictiveDraw predictive_draw(const model::ModelContext& ctx, const ttmcmc::SampleRow& row,
                               const model::SpaceTimePoint& x, std::optional<double> covariate,
                               Rng& rng) {
  const auto& fx = row.fixed;
  if (ctx.data.regression())
    require(covariate.has_value(), "predictive: regression mode needs the covariate at x");
  std::vector<Eigen::Vector2d> locs{{x.s1, x.s2}};
  locs.insert(locs.end(), ctx.locations.begin(), ctx.locations.end());
  std::vector<double> times{x.t};
  times.insert(times.end(), ctx.times.begin(), ctx.times.end());
  const Eigen::MatrixXd cpsi = kernel::gp_covariance_psi(locs, fx.b_psi);
  const Eigen::MatrixXd cdel = kernel::gp_covariance_delta(times, fx.a_delta);
  const double psi1 = conditional_field_draw(cpsi, fx.psi1, rng);
  const double psi2 = conditional_field_draw(cpsi, fx.psi2, rng);
  const double log_delta = conditional_field_draw(cdel, fx.log_delta, rng);

  PredictiveDraw d;
  const auto site = model::site_kernel(psi1, psi2, log_delta, fx.phi, ctx.hyper.A);
  d.f = model::f_eval(x, site, row.var, fx.tau);
  d.mean = d.f;
  if (ctx.data.regression()) d.mean += fx.alpha0 + fx.alpha1 * *covariate;
  d.y = d.mean + fx.sigma * rng.normal();
  return d;
}

std::vector<double> predictive_draws(const model::ModelContext& ctx,
                                     const std::vector<ttmcmc::SampleRow>& rows,
                                     const model::SpaceTimePoint& x,
                                     std::optional<double> covariate, Rng& rng) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predictive_draw(ctx, r, x, covariate, rng).y);
  return out;
}

PredictiveSummary posterior_predictive(const model::ModelContext& ctx,
                                       const std::vector<ttmcmc::SampleRow>& rows,
                                       const model::SpaceTimePoint& x,
                                       std::optional<double> covariate, Rng& rng, double level) {
  require(!rows.empty(), "posterior_predictive: empty archive");
  return summarize_draws(predictive_draws(ctx, rows, x, covariate, rng), level);
}

}  // namespace kcoddp::pipeline
