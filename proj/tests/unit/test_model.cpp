#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "kcoddp/error.hpp"
#include "kcoddp/kernel.hpp"
#include "kcoddp/model.hpp"
#include "kcoddp/oddp.hpp"

using namespace kcoddp;
using namespace kcoddp::model;

namespace {

constexpr double kPi = std::numbers::pi;

Dataset small_dataset(bool regression = false) {
  Dataset d;
  Rng rng(77);
  for (int i = 0; i < 6; ++i) {
    d.points.push_back({rng.normal(), rng.normal(), 3.0 * rng.normal()});  // spread times keep the delta covariance well conditioned
    d.y.push_back(rng.normal(0.3, 0.5));
  }
  if (regression) {
    std::vector<double> c;
    for (int i = 0; i < 6; ++i) c.push_back(rng.normal());
    d.covariate = c;
  }
  return d;
}

// Fields are drawn from their GP priors so the densities stay moderate.
FixedState fixed_for(const Dataset& d, Rng& rng) {
  FixedState f;
  f.phi = 4.0;
  f.a_delta = 3.5;
  f.b_psi = 3.5;
  f.tau = 0.2;
  f.alpha = 1.3;
  f.lambda = 4.0;
  f.sigma = 0.7;
  std::vector<Eigen::Vector2d> loc;
  std::vector<double> times;
  for (const auto& p : d.points) {
    loc.emplace_back(p.s1, p.s2);
    times.push_back(p.t);
  }
  const auto fl = kernel::sample_fields(loc, times, f.b_psi, f.a_delta, rng);
  const auto n = static_cast<std::ptrdiff_t>(d.size());
  f.psi1.assign(fl.psi1.data(), fl.psi1.data() + n);
  f.psi2.assign(fl.psi2.data(), fl.psi2.data() + n);
  f.log_delta.assign(fl.log_delta.data(), fl.log_delta.data() + n);
  f.alpha0 = 0.4;
  f.alpha1 = -0.2;
  return f;
}

double normal_pdf(double x, double m, double s) {
  return std::exp(-0.5 * (x - m) * (x - m) / (s * s)) / (s * std::sqrt(2 * kPi));
}

// Straight-line f: enumerate eligible atoms, sort by distance, multiply out.
double brute_f(const SpaceTimePoint& x, const SiteKernel& site, const VariableState& v, double tau) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < v.k(); ++i)
    if (v.z[i].t <= x.t)
      d.emplace_back(std::pow(x.s1 - v.z[i].s1, 2) + std::pow(x.s2 - v.z[i].s2, 2) + std::pow(x.t - v.z[i].t, 2), i);
  std::sort(d.begin(), d.end());
  const Eigen::Matrix2d S = site.sigma_half.sigma();
  double f = 0.0;
  for (std::size_t pos = 0; pos < d.size(); ++pos) {
    const std::size_t a = d[pos].second;
    double w = v.V[a];
    for (std::size_t q = 0; q < pos; ++q) w *= 1.0 - v.V[d[q].second];
    const Eigen::Vector2d u(x.s1 - v.theta1[a], x.s2 - v.theta2[a]);
    f += w * std::exp(-0.5 * u.dot(S * u) - site.delta * std::fabs(x.t - tau));
  }
  return f;
}

// Composite Simpson rule on [a, b].
template <typename F>
double simpson(F f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double gp_logpdf(const std::vector<double>& v, const Eigen::MatrixXd& C) {
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
  return -0.5 * static_cast<double>(v.size()) * std::log(2 * kPi) - 0.5 * std::log(C.determinant()) -
         0.5 * x.dot(C.fullPivLu().solve(x));
}

}  // namespace

TEST_CASE("f_eval small cases") {
  const SiteKernel site{kernel::sigma_half(0.1, 0.2, 3.0, kernel::kHigdonA), 1.5};
  VariableState v;
  v.V = {0.4};
  v.z = {{0, 0, -1}};
  v.theta1 = {0.1};
  v.theta2 = {-0.2};
  const SpaceTimePoint x{0.3, 0.1, 0.5};
  const double K = kernel::kernel_eval(x, {0.1, -0.2}, 0.2, site.sigma_half, 1.5);
  CHECK(f_eval(x, site, v, 0.2) == doctest::Approx(0.4 * K).epsilon(1e-14));

  // K = 1 everywhere the kernel centre sits on x and t = tau
  VariableState w;
  w.V = {0.5, 0.3, 0.2};
  w.z = {{1, 0, 0}, {0, 2, 0}, {0, 0, 0}};
  w.theta1 = {0.3, 0.3, 0.3};
  w.theta2 = {0.1, 0.1, 0.1};
  const double f = f_eval({0.3, 0.1, 0.0}, site, w, 0.0);
  CHECK(f == doctest::Approx(1.0 - 0.5 * 0.7 * 0.8).epsilon(1e-14));
  CHECK(f < 1.0);

  // no eligible atom
  CHECK(f_eval({0, 0, -5}, site, w, 0.0) == 0.0);
}

TEST_CASE("f_eval matches a straight-line evaluator") {
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    VariableState v;
    const std::size_t k = 1 + rng.index(8);
    for (std::size_t i = 0; i < k; ++i) {
      v.V.push_back(rng.uniform_open());
      v.z.push_back({rng.normal(), rng.normal(), rng.normal()});
      v.theta1.push_back(rng.normal());
      v.theta2.push_back(rng.normal());
    }
    const SiteKernel site{kernel::sigma_half(rng.normal(), rng.normal(), rng.uniform(3, 10), kernel::kHigdonA),
                          std::exp(rng.normal())};
    const SpaceTimePoint x{rng.normal(), rng.normal(), rng.normal()};
    const double tau = rng.normal();
    CHECK(f_eval(x, site, v, tau) == doctest::Approx(brute_f(x, site, v, tau)).epsilon(1e-12));
  }
}

TEST_CASE("log likelihood") {
  Dataset d;
  d.points = {{0, 0, 0}};
  d.y = {1.5};
  CHECK(log_likelihood(d, {1.5}, 0.8) == doctest::Approx(-0.5 * std::log(2 * kPi * 0.64)));

  const auto data = small_dataset();
  const std::vector<double> zero_resid = data.y;
  CHECK(log_likelihood(data, zero_resid, 1.0) - log_likelihood(data, zero_resid, 2.0) ==
        doctest::Approx(6.0 * std::log(2.0)));
  CHECK_THROWS_AS(log_likelihood(data, zero_resid, 0.0), InvalidParameter);

  const auto reg = small_dataset(true);
  Rng rng(2);
  std::vector<double> f(6);
  for (auto& v : f) v = rng.normal();
  double prod = 1.0;
  for (std::size_t i = 0; i < 6; ++i)
    prod *= normal_pdf(reg.y[i], 0.5 + 1.5 * (*reg.covariate)[i] + f[i], 0.9);
  CHECK(log_likelihood(reg, f, 0.9, std::make_pair(0.5, 1.5)) == doctest::Approx(std::log(prod)).epsilon(1e-12));
}

TEST_CASE("alpha prior") {
  CHECK(std::exp(log_prior_alpha(2.0, 2.0, 1.0)) == doctest::Approx(1.0 / 8.0));
  const auto dens = [](double n0, double eta) {
    return [=](double a) { return std::exp(log_prior_alpha(a, n0, eta)); };
  };
  // u = a / (a + n0) maps (0, inf) to (0, 1); da = n0 / (1-u)^2 du
  const auto in_u = [](auto f, double n0) {
    return [=](double u) mutable {
      u = std::clamp(u, 1e-12, 1.0 - 1e-12);
      return f(n0 * u / (1.0 - u)) * n0 / ((1.0 - u) * (1.0 - u));
    };
  };
  CHECK(simpson(in_u(dens(1.5, 1.0), 1.5), 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  for (const double eta : {1.0, 2.0, 4.0})
    CHECK(simpson(in_u(dens(1.5, eta), 1.5), 0.0, 0.5) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(log_prior_alpha(0.0, 1.0, 2.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("lambda prior") {
  CHECK(log_prior_lambda(1.7, 1.7, 20.0) == doctest::Approx(-0.5 * std::log(2 * kPi * 20.0) - std::log(1.7)));
  // integrate over log(lambda)
  const auto g = [](double l) { return std::exp(log_prior_lambda(std::exp(l), 2.0, 20.0) + l); };
  CHECK(simpson(g, std::log(2.0) - 60.0, std::log(2.0) + 60.0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(simpson(g, std::log(2.0) - 60.0, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("prior support") {
  const auto data = small_dataset();
  const auto ctx = make_context(data, Hyper{}, 1.0, 5.0, 0.01);
  Rng rng(9);
  auto fx = fixed_for(data, rng);
  auto var = sample_variable_prior(3, fx.alpha, ctx, rng);
  CHECK(std::isfinite(log_prior_all(var, fx, ctx)));

  auto big = sample_variable_prior(31, fx.alpha, ctx, rng);
  CHECK(log_prior_all(big, fx, ctx) == -std::numeric_limits<double>::infinity());
  auto bad = var;
  bad.V[1] = 1.0;
  CHECK(log_prior_all(bad, fx, ctx) == -std::numeric_limits<double>::infinity());
  bad = var;
  bad.z[0].s1 = ctx.box.upper[0] + 0.1;
  CHECK(log_prior_all(bad, fx, ctx) == -std::numeric_limits<double>::infinity());
  auto fbad = fx;
  fbad.phi = 2.9;
  CHECK(log_prior_all(var, fbad, ctx) == -std::numeric_limits<double>::infinity());
  fbad = fx;
  fbad.sigma = -1.0;
  CHECK(log_posterior(var, fbad, ctx) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("joint prior term by term") {
  for (const bool regression : {false, true}) {
    const auto data = small_dataset(regression);
    const Hyper h;
    const auto ctx = make_context(data, h, 1.0, 5.0, 0.01);
    Rng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
      const auto fx = fixed_for(data, rng);
      const auto var = sample_variable_prior(1 + rng.index(6), fx.alpha, ctx, rng);
      double vol = 1.0;
      for (int d = 0; d < 3; ++d) vol *= ctx.box.upper[d] - ctx.box.lower[d];
      const double rho = ctx.g0.rho;
      double lp = std::log(1.0 / 30.0);
      for (std::size_t i = 0; i < var.k(); ++i) {
        lp += std::log(fx.alpha * std::pow(1.0 - var.V[i], fx.alpha - 1.0));  // Beta(1, alpha)
        lp += -std::log(vol);
        const double t1 = var.theta1[i], t2 = var.theta2[i];
        lp += std::log(std::exp(-(t1 * t1 - 2 * rho * t1 * t2 + t2 * t2) / (2 * (1 - rho * rho))) /
                       (2 * kPi * std::sqrt(1 - rho * rho)));
      }
      Eigen::MatrixXd Cp(6, 6), Cd(6, 6);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          const auto& a = data.points[i];
          const auto& b = data.points[j];
          Cp(i, j) = std::exp(-((a.s1 - b.s1) * (a.s1 - b.s1) + (a.s2 - b.s2) * (a.s2 - b.s2)) / fx.b_psi);
          Cd(i, j) = std::exp(-(a.t - b.t) * (a.t - b.t) / fx.a_delta);
        }
      lp += gp_logpdf(fx.psi1, Cp) + gp_logpdf(fx.psi2, Cp) + gp_logpdf(fx.log_delta, Cd);
      lp += 3.0 * std::log(1.0 / 197.0);
      lp += std::log(normal_pdf(fx.tau, 0.0, 1.0));
      lp += std::log(normal_pdf(std::log(fx.sigma), 0.0, 1.0) / fx.sigma);
      // inverted Beta with n0 = 1, eta = 2: Gamma(4)/Gamma(2)^2 = 6
      lp += std::log(6.0 * fx.alpha / std::pow(fx.alpha + 1.0, 4));
      lp += std::log(normal_pdf(std::log(fx.lambda), std::log(fx.alpha), std::sqrt(20.0)) / fx.lambda);
      if (regression) lp += std::log(normal_pdf(fx.alpha0, 0, 100.0) * normal_pdf(fx.alpha1, 0, 100.0));
      CHECK(log_prior_all(var, fx, ctx) == doctest::Approx(lp).epsilon(1e-10));

      // posterior = prior + likelihood of the straight-line f
      double ll = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        const SiteKernel site{kernel::sigma_half(fx.psi1[i], fx.psi2[i], fx.phi, 3.5), std::exp(fx.log_delta[i])};
        double mean = brute_f(data.points[i], site, var, fx.tau);
        if (regression) mean += fx.alpha0 + fx.alpha1 * (*data.covariate)[i];
        ll += std::log(normal_pdf(data.y[i], mean, fx.sigma));
      }
      CHECK(log_posterior(var, fx, ctx) == doctest::Approx(lp + ll).epsilon(1e-10));
    }
  }
}

TEST_CASE("posterior is invariant to permuting data rows") {
  const auto data = small_dataset();
  Rng rng(4);
  const auto fx = fixed_for(data, rng);
  const auto ctx = make_context(data, Hyper{}, 1.0, 5.0, 0.01);
  const auto var = sample_variable_prior(4, fx.alpha, ctx, rng);
  const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
  Dataset pd;
  FixedState pf = fx;
  pf.psi1.clear();
  pf.psi2.clear();
  pf.log_delta.clear();
  for (const auto i : perm) {
    pd.points.push_back(data.points[i]);
    pd.y.push_back(data.y[i]);
    pf.psi1.push_back(fx.psi1[i]);
    pf.psi2.push_back(fx.psi2[i]);
    pf.log_delta.push_back(fx.log_delta[i]);
  }
  const auto pctx = make_context(pd, Hyper{}, 1.0, 5.0, 0.01);
  CHECK(log_posterior(var, pf, pctx) == doctest::Approx(log_posterior(var, fx, ctx)).epsilon(1e-12));
}

TEST_CASE("prior mean and variance of f") {
  // Many atoms, all eligible at x: E f = E_G0 K and Var f = Var_G0 K / (alpha + 1).
  const SiteKernel site{kernel::sigma_half(0.0, 0.0, 1.0, kernel::kHigdonA), 1.0};
  const SpaceTimePoint x{0.4, -0.3, 0.0};
  // quadrature of the G0 moments (rho = 0, tau = x.t)
  const auto K = [&](double a, double b) {
    return kernel::kernel_eval(x, {a, b}, 0.0, site.sigma_half, 1.0);
  };
  double m1 = 0.0, m2 = 0.0;
  const int g = 400;
  const double lo = -9.0, step = 18.0 / g;
  for (int i = 0; i <= g; ++i)
    for (int j = 0; j <= g; ++j) {
      const double a = lo + i * step, b = lo + j * step;
      const double w = (i == 0 || i == g ? 0.5 : 1.0) * (j == 0 || j == g ? 0.5 : 1.0) * step * step *
                       std::exp(-0.5 * (a * a + b * b)) / (2 * kPi);
      const double k = K(a, b);
      m1 += w * k;
      m2 += w * k * k;
    }
  const double varK = m2 - m1 * m1;

  for (const double alpha : {1.0, 5.0}) {
    Rng rng(alpha == 1.0 ? 100 : 500);
    const int reps = 100000;
    double s = 0, s2 = 0, s3 = 0, s4 = 0;
    for (int r = 0; r < reps; ++r) {
      // sticks cut once the remaining mass is negligible; atoms all sit before x
      double rem = 1.0, f = 0.0;
      while (rem > 1e-16) {
        const double v = rng.beta_one(alpha);
        f += v * rem * K(rng.normal(), rng.normal());
        rem *= 1.0 - v;
      }
      s += f;
      s2 += f * f;
      s3 += f * f * f;
      s4 += f * f * f * f;
    }
    const double mean = s / reps;
    const double var = s2 / reps - mean * mean;
    const double se_mean = std::sqrt(var / reps);
    // SE of the sample variance from the fourth central moment
    const double c4 = s4 / reps - 4 * mean * s3 / reps + 6 * mean * mean * s2 / reps - 3 * std::pow(mean, 4);
    const double se_var = std::sqrt((c4 - var * var) / reps);
    CAPTURE(alpha);
    CHECK(std::fabs(mean - m1) < 3.0 * se_mean);
    CHECK(std::fabs(var - varK / (alpha + 1.0)) < 3.0 * se_var);
  }
}

TEST_CASE("f_eval through the ordering reproduces the stick construction") {
  // Same check as above but through f_eval with explicit atoms, at small scale.
  const auto data = small_dataset();
  const auto ctx = make_context(data, Hyper{}, 1.0, 5.0, 0.01);
  Rng rng(12);
  const SiteKernel site{kernel::sigma_half(0.2, 0.1, 3.0, 3.5), 1.0};
  for (int r = 0; r < 200; ++r) {
    const auto var = sample_variable_prior(10, 1.0, ctx, rng);
    const SpaceTimePoint x{rng.normal(), rng.normal(), rng.normal()};
    const auto ord = geometry::compute_ordering(x, var.z, geometry::RelevantSet::spacetime);
    const auto p = oddp::weights_for_ordering({var.V, 1.0}, ord, ord.size());
    double f = 0.0;
    for (std::size_t i = 0; i < ord.size(); ++i)
      f += p[i] * kernel::kernel_eval(x, {var.theta1[ord[i]], var.theta2[ord[i]]}, 0.1, site.sigma_half, 1.0);
    CHECK(f_eval(x, site, var, 0.1) == doctest::Approx(f).epsilon(1e-12));
  }
}

TEST_CASE("posterior finite on prior draws") {
  const auto data = small_dataset();
  const auto ctx = make_context(data, Hyper{}, 1.0, 5.0, 0.01);
  Rng rng(1234);
  int finite = 0;
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    FixedState fx;
    fx.phi = rng.uniform(3.0, 200.0);
    fx.a_delta = rng.uniform(3.0, 200.0);
    fx.b_psi = rng.uniform(3.0, 200.0);
    const auto f = kernel::sample_fields(ctx.locations, ctx.times, fx.b_psi, fx.a_delta, rng);
    fx.psi1.assign(f.psi1.data(), f.psi1.data() + 6);
    fx.psi2.assign(f.psi2.data(), f.psi2.data() + 6);
    fx.log_delta.assign(f.log_delta.data(), f.log_delta.data() + 6);
    fx.tau = rng.normal();
    fx.sigma = std::exp(rng.normal());
    // inverted Beta(eta = 2) draw through u ~ Beta(2, 2): alpha = u / (1 - u)
    const double u = (rng.uniform() + rng.uniform() + rng.uniform()) / 3.0;  // any interior value
    fx.alpha = u / (1.0 - u);
    fx.lambda = std::exp(rng.normal(std::log(fx.alpha), std::sqrt(20.0)));
    const auto var = sample_variable_prior(1 + rng.index(30), fx.alpha, ctx, rng);
    if (std::isfinite(log_posterior(var, fx, ctx))) ++finite;
  }
  CHECK(finite == reps);
}
