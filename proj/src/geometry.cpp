#include "kcoddp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "kcoddp/error.hpp"

namespace kcoddp::geometry {

bool SpaceTimePoint::finite() const {
  return std::isfinite(s1) && std::isfinite(s2) && std::isfinite(t);
}

double ComputationalBox::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
  return v;
}

bool ComputationalBox::contains(const SpaceTimePoint& p) const {
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (p[i] < lower[i] || p[i] > upper[i]) return false;
  return true;
}

double region_margin(double alpha, double lambda, double epsilon, int d) {
  require(alpha > 0.0 && std::isfinite(alpha), "computational_region: alpha must be positive");
  require(lambda > 0.0 && std::isfinite(lambda), "computational_region: lambda must be positive");
  require(epsilon > 0.0 && epsilon < 1.0, "computational_region: epsilon must lie in (0,1)");
  require(d >= 1, "computational_region: d must be >= 1");
  const double dd = d;
  // Gamma(d/2) d / (2 pi^{d/2}) is the reciprocal of the unit-ball volume.
  const double inv_ball =
      std::exp(std::lgamma(dd / 2.0) - std::log(2.0) - (dd / 2.0) * std::log(std::numbers::pi)) *
      dd;
  const double inner = inv_ball * (alpha + 1.0) / lambda * std::log(1.0 / epsilon);
  return 2.0 * std::pow(inner, 1.0 / dd);
}

ComputationalBox computational_region(const std::vector<double>& data_min,
                                      const std::vector<double>& data_max, double alpha,
                                      double lambda, double epsilon, int d) {
  require(d >= 1 && d <= 3, "computational_region: d must be 1, 2 or 3");
  require(data_min.size() == static_cast<std::size_t>(d) &&
              data_max.size() == static_cast<std::size_t>(d),
          "computational_region: data range must have d components");
  for (int i = 0; i < d; ++i)
    require(data_min[i] <= data_max[i], "computational_region: data_min exceeds data_max");
  const double r = region_margin(alpha, lambda, epsilon, d);
  ComputationalBox box;
  box.margin_r = r;
  box.epsilon = epsilon;
  for (int i = 0; i < d; ++i) {
    box.lower.push_back(data_min[i] - r);
    box.upper.push_back(data_max[i] + r);
  }
  return box;
}

PointConfiguration sample_poisson_configuration(const ComputationalBox& box, double lambda,
                                                Rng& rng) {
  require(lambda > 0.0 && std::isfinite(lambda), "sample_poisson_configuration: lambda > 0");
  require(box.dim() >= 1 && box.dim() <= 3 && box.upper.size() == box.dim(),
          "sample_poisson_configuration: malformed box");
  for (std::size_t i = 0; i < box.dim(); ++i)
    require(box.lower[i] < box.upper[i], "sample_poisson_configuration: empty box");
  PointConfiguration config;
  config.intensity_lambda = lambda;
  const auto count = rng.poisson(lambda * box.volume());
  config.points.reserve(count);
  for (std::uint64_t n = 0; n < count; ++n) {
    SpaceTimePoint p;
    for (std::size_t i = 0; i < box.dim(); ++i) p[i] = rng.uniform(box.lower[i], box.upper[i]);
    config.points.push_back(p);
  }
  return config;
}

bool relevant_set_contains(const SpaceTimePoint& x, const SpaceTimePoint& z, RelevantSet mode) {
  switch (mode) {
    case RelevantSet::spatial: return true;
    case RelevantSet::temporal:
    case RelevantSet::spacetime: return z.t <= x.t;
  }
  return false;
}

double squared_distance(const SpaceTimePoint& a, const SpaceTimePoint& b, RelevantSet mode) {
  const double d1 = a.s1 - b.s1, d2 = a.s2 - b.s2, dt = a.t - b.t;
  switch (mode) {
    case RelevantSet::spatial: return d1 * d1 + d2 * d2;
    case RelevantSet::temporal: return dt * dt;
    case RelevantSet::spacetime: return d1 * d1 + d2 * d2 + dt * dt;
  }
  return 0.0;
}

Ordering compute_ordering(const SpaceTimePoint& x, const std::vector<SpaceTimePoint>& points,
                          RelevantSet mode) {
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    if (relevant_set_contains(x, points[i], mode))
      keyed.emplace_back(squared_distance(x, points[i], mode), i);
  std::sort(keyed.begin(), keyed.end());
  Ordering perm(keyed.size());
  for (std::size_t i = 0; i < keyed.size(); ++i) perm[i] = keyed[i].second;
  return perm;
}

}  // namespace kcoddp::geometry
