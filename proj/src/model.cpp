#include "kcoddp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kcoddp/error.hpp"
#include "kcoddp/linalg.hpp"
#include "kcoddp/oddp.hpp"

namespace kcoddp::model {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double normal_log_density(double x, double mean, double sd) {
  const double u = (x - mean) / sd;
  return -kLogSqrt2Pi - std::log(sd) - 0.5 * u * u;
}

}  // namespace

Dataset Dataset::without(std::size_t i) const {
  Dataset out;
  for (std::size_t r = 0; r < size(); ++r) {
    if (r == i) continue;
    out.points.push_back(points[r]);
    out.y.push_back(y[r]);
  }
  if (covariate) {
    std::vector<double> c;
    for (std::size_t r = 0; r < size(); ++r)
      if (r != i) c.push_back((*covariate)[r]);
    out.covariate = std::move(c);
  }
  return out;
}

double CenteringDistribution::log_density(double t1, double t2) const {
  const double one_m = 1.0 - rho * rho;
  const double q = (t1 * t1 - 2.0 * rho * t1 * t2 + t2 * t2) / one_m;
  return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(one_m) - 0.5 * q;
}

Eigen::Vector2d CenteringDistribution::sample(Rng& rng) const {
  const double a = rng.normal(), b = rng.normal();
  return {a, rho * a + std::sqrt(1.0 - rho * rho) * b};
}

ModelContext::ModelContext(Dataset d, Hyper h, geometry::ComputationalBox b, double rho)
    : data(std::move(d)), hyper(h), box(std::move(b)), g0{rho} {
  require(data.y.size() == data.points.size(), "dataset: y and points must align");
  if (data.covariate)
    require(data.covariate->size() == data.points.size(), "dataset: covariate must align");
  require(std::fabs(rho) < 1.0, "G0 correlation must lie in (-1, 1)");
  require(box.dim() == 3, "model: computational box must be 3-dimensional (s1, s2, t)");
  for (const auto& p : data.points) {
    locations.emplace_back(p.s1, p.s2);
    times.push_back(p.t);
  }
}

double empirical_rho(const Dataset& data) {
  const auto n = static_cast<double>(data.size());
  if (data.size() < 2) return 0.0;
  double m1 = 0, m2 = 0;
  for (const auto& p : data.points) { m1 += p.s1; m2 += p.s2; }
  m1 /= n; m2 /= n;
  double c = 0, v1 = 0, v2 = 0;
  for (const auto& p : data.points) {
    c += (p.s1 - m1) * (p.s2 - m2);
    v1 += (p.s1 - m1) * (p.s1 - m1);
    v2 += (p.s2 - m2) * (p.s2 - m2);
  }
  if (v1 <= 0.0 || v2 <= 0.0) return 0.0;
  return c / std::sqrt(v1 * v2);
}

SiteKernel site_kernel(double psi1, double psi2, double log_delta, double phi, double A) {
  return {kernel::sigma_half(psi1, psi2, phi, A), std::exp(log_delta)};
}

double f_eval(const SpaceTimePoint& x, const SiteKernel& site, const VariableState& var,
              double tau) {
  const auto order = geometry::compute_ordering(x, var.z, geometry::RelevantSet::spacetime);
  // The temporal factor exp(-delta |t - tau|) is common to every atom.
  const double temporal = std::exp(-site.delta * std::fabs(x.t - tau));
  double f = 0.0;
  double remaining = 1.0;
  for (const auto atom : order) {
    const double p = var.V[atom] * remaining;
    remaining *= 1.0 - var.V[atom];
    f += p * kernel::spatial_kernel(x.s1, x.s2, {var.theta1[atom], var.theta2[atom]},
                                    site.sigma_half);
  }
  return temporal * f;
}

std::vector<double> f_values(const Dataset& data, const VariableState& var,
                             const FixedState& fixed, double A) {
  std::vector<double> f(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto site = site_kernel(fixed.psi1[i], fixed.psi2[i], fixed.log_delta[i], fixed.phi, A);
    f[i] = f_eval(data.points[i], site, var, fixed.tau);
  }
  return f;
}

double log_likelihood(const Dataset& data, const std::vector<double>& f, double sigma,
                      std::optional<std::pair<double, double>> regression) {
  require(sigma > 0.0 && std::isfinite(sigma), "log_likelihood: sigma must be positive");
  require(f.size() == data.y.size(), "log_likelihood: f and y must align");
  if (regression) require(data.covariate.has_value(), "log_likelihood: regression needs covariate");
  const double log_sigma = std::log(sigma);
  double ll = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double mean = f[i];
    if (regression) mean += regression->first + regression->second * (*data.covariate)[i];
    const double u = (data.y[i] - mean) / sigma;
    ll += -kLogSqrt2Pi - log_sigma - 0.5 * u * u;
  }
  return ll;
}

double log_prior_alpha(double alpha, double n0, double eta) {
  require(n0 > 0.0 && eta > 0.0, "log_prior_alpha: n0 and eta must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) return kNegInf;
  return eta * std::log(n0) + std::lgamma(2.0 * eta) + (eta - 1.0) * std::log(alpha) -
         2.0 * std::lgamma(eta) - 2.0 * eta * std::log(alpha + n0);
}

double log_prior_lambda(double lambda, double alpha, double b_lambda) {
  require(b_lambda > 0.0, "log_prior_lambda: b_lambda must be positive");
  if (!(lambda > 0.0) || !(alpha > 0.0) || !std::isfinite(lambda)) return kNegInf;
  const double u = std::log(lambda) - std::log(alpha);
  return -0.5 * std::log(2.0 * std::numbers::pi * b_lambda) - std::log(lambda) -
         0.5 * u * u / b_lambda;
}

double log_prior_all(const VariableState& var, const FixedState& fx, const ModelContext& ctx) {
  const auto& h = ctx.hyper;
  const std::size_t k = var.k();
  const std::size_t n = ctx.data.size();
  if (!var.consistent() || k < 1 || k > h.k_max) return kNegInf;
  if (fx.psi1.size() != n || fx.psi2.size() != n || fx.log_delta.size() != n) return kNegInf;
  for (const double u : {fx.phi, fx.a_delta, fx.b_psi})
    if (!(u > h.uniform_lo && u < h.uniform_hi)) return kNegInf;
  if (!(fx.alpha > 0.0) || !(fx.lambda > 0.0) || !(fx.sigma > 0.0)) return kNegInf;

  double lp = -std::log(static_cast<double>(h.k_max));  // discrete uniform on {1..k_max}

  const double log_vol = std::log(ctx.box.volume());
  for (std::size_t i = 0; i < k; ++i) {
    if (!(var.V[i] > 0.0 && var.V[i] < 1.0)) return kNegInf;
    if (!ctx.box.contains(var.z[i])) return kNegInf;
    lp += std::log(fx.alpha) + (fx.alpha - 1.0) * std::log1p(-var.V[i]);
    lp += -log_vol;
    lp += ctx.g0.log_density(var.theta1[i], var.theta2[i]);
  }

  const linalg::JitteredCholesky psi_chol(kernel::gp_covariance_psi(ctx.locations, fx.b_psi));
  const linalg::JitteredCholesky delta_chol(kernel::gp_covariance_delta(ctx.times, fx.a_delta));
  const auto as_vec = [](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  };
  lp += psi_chol.log_density(as_vec(fx.psi1));
  lp += psi_chol.log_density(as_vec(fx.psi2));
  lp += delta_chol.log_density(as_vec(fx.log_delta));

  lp += 3.0 * -std::log(h.uniform_hi - h.uniform_lo);
  lp += normal_log_density(fx.tau, 0.0, h.tau_sd);
  lp += normal_log_density(std::log(fx.sigma), h.sigma_log_mean, h.sigma_log_sd) - std::log(fx.sigma);
  lp += log_prior_alpha(fx.alpha, h.n0, h.eta);
  lp += log_prior_lambda(fx.lambda, fx.alpha, h.b_lambda);
  if (ctx.data.regression()) {
    const double sd = std::sqrt(h.regression_prior_var);
    lp += normal_log_density(fx.alpha0, 0.0, sd) + normal_log_density(fx.alpha1, 0.0, sd);
  }
  return lp;
}

double log_posterior(const VariableState& var, const FixedState& fixed, const ModelContext& ctx) {
  const double lp = log_prior_all(var, fixed, ctx);
  if (!std::isfinite(lp)) return kNegInf;
  const auto f = f_values(ctx.data, var, fixed, ctx.hyper.A);
  std::optional<std::pair<double, double>> reg;
  if (ctx.data.regression()) reg = std::make_pair(fixed.alpha0, fixed.alpha1);
  return lp + log_likelihood(ctx.data, f, fixed.sigma, reg);
}

VariableState sample_variable_prior(std::size_t k, double alpha, const ModelContext& ctx,
                                    Rng& rng) {
  VariableState var;
  var.V = oddp::sample_sticks(alpha, k, rng);
  for (std::size_t i = 0; i < k; ++i) {
    SpaceTimePoint z;
    for (std::size_t d = 0; d < 3; ++d) z[d] = rng.uniform(ctx.box.lower[d], ctx.box.upper[d]);
    var.z.push_back(z);
    const auto th = ctx.g0.sample(rng);
    var.theta1.push_back(th[0]);
    var.theta2.push_back(th[1]);
  }
  return var;
}

}  // namespace kcoddp::model

namespace kcoddp::model {

ModelContext make_context(Dataset data, const Hyper& hyper, double alpha, double lambda,
                          double epsilon) {
  require(data.size() >= 1, "make_context: empty dataset");
  std::vector<double> lo(3, std::numeric_limits<double>::infinity());
  std::vector<double> hi(3, -std::numeric_limits<double>::infinity());
  for (const auto& p : data.points)
    for (std::size_t d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  auto box = geometry::computational_region(lo, hi, alpha, lambda, epsilon, 3);
  const double rho = empirical_rho(data);
  return ModelContext(std::move(data), hyper, std::move(box), rho);
}

}  // namespace kcoddp::model
