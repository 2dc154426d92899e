#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "kcoddp/rng.hpp"

namespace kcoddp::geometry {

/// A location-time coordinate x = (s1, s2, t). Coordinate i of a d-dimensional
/// box maps onto component i, so d = 1 uses s1 only and d = 3 uses all three.
struct SpaceTimePoint {
  double s1 = 0.0;
  double s2 = 0.0;
  double t = 0.0;

  double operator[](std::size_t i) const { return i == 0 ? s1 : (i == 1 ? s2 : t); }
  double& operator[](std::size_t i) { return i == 0 ? s1 : (i == 1 ? s2 : t); }
  bool finite() const;
  friend bool operator==(const SpaceTimePoint&, const SpaceTimePoint&) = default;
};

/// Which points of the configuration may order atoms at x (the relevant set U(x)).
enum class RelevantSet {
  spatial,    // U(x) = D; distances on (s1, s2)
  temporal,   // U(x) = (-inf, t]; distances on t
  spacetime,  // U(x) = D x (-inf, t]; distances on (s1, s2, t)
};

struct ComputationalBox {
  std::vector<double> lower;
  std::vector<double> upper;
  double margin_r = 0.0;
  double epsilon = 0.01;

  std::size_t dim() const { return lower.size(); }
  double volume() const;
  bool contains(const SpaceTimePoint& p) const;
};

struct PointConfiguration {
  std::vector<SpaceTimePoint> points;
  double intensity_lambda = 1.0;
};

/// Permutation of configuration indices, nearest first.
using Ordering = std::vector<std::size_t>;

/// Margin r added on every side of the data range so that, with probability
/// about 1 - epsilon, the atoms that matter for the data lie inside the box.
double region_margin(double alpha, double lambda, double epsilon, int d);

ComputationalBox computational_region(const std::vector<double>& data_min,
                                      const std::vector<double>& data_max, double alpha,
                                      double lambda, double epsilon, int d);

PointConfiguration sample_poisson_configuration(const ComputationalBox& box, double lambda,
                                                Rng& rng);

bool relevant_set_contains(const SpaceTimePoint& x, const SpaceTimePoint& z, RelevantSet mode);

/// Squared Euclidean distance in the metric space of `mode`.
double squared_distance(const SpaceTimePoint& a, const SpaceTimePoint& b, RelevantSet mode);

/// Eligible points sorted by distance to x; ties go to the lower index.
Ordering compute_ordering(const SpaceTimePoint& x, const std::vector<SpaceTimePoint>& points,
                          RelevantSet mode);

inline Ordering compute_ordering(const SpaceTimePoint& x, const PointConfiguration& config,
                                 RelevantSet mode) {
  return compute_ordering(x, config.points, mode);
}

}  // namespace kcoddp::geometry
