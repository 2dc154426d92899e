#pragma once

#include <optional>
#include <vector>

#include "kcoddp/chain.hpp"
#include "kcoddp/model.hpp"
#include "kcoddp/rng.hpp"

namespace kcoddp::pipeline {

inline constexpr std::size_t kDensityGridPoints = 256;

struct PredictiveSummary {
  std::size_t n_draws = 0;
  double mean = 0.0;
  double median = 0.0;
  double lower = 0.0;  // (1 - level)/2 quantile
  double upper = 0.0;  // (1 + level)/2 quantile
  std::vector<double> grid;
  std::vector<double> density;
};

/// Linear-interpolation quantile of sorted data (R type 7).
double quantile_type7(const std::vector<double>& sorted, double p);

/// Quantiles plus a Gaussian kernel density on a grid spanning the draws'
/// range widened by 10% each side; bandwidth 1.06 sd n^{-1/5}.
PredictiveSummary summarize_draws(std::vector<double> draws, double level = 0.95);

struct PredictiveDraw {
  double f = 0.0;      // f_k(x) under the row's parameters
  double mean = 0.0;   // f plus the regression term
  double y = 0.0;      // mean + sigma * N(0,1)
};

/// One predictive draw from a posterior sample. The fields psi1, psi2 and
/// log_delta at x are drawn from their Gaussian-process conditional given the
/// row's values at the data sites.
PredictiveDraw predictive_draw(const model::ModelContext& ctx, const ttmcmc::SampleRow& row,
                               const model::SpaceTimePoint& x, std::optional<double> covariate,
                               Rng& rng);

std::vector<double> predictive_draws(const model::ModelContext& ctx,
                                     const std::vector<ttmcmc::SampleRow>& rows,
                                     const model::SpaceTimePoint& x,
                                     std::optional<double> covariate, Rng& rng);

PredictiveSummary posterior_predictive(const model::ModelContext& ctx,
                                       const std::vector<ttmcmc::SampleRow>& rows,
                                       const model::SpaceTimePoint& x,
                                       std::optional<double> covariate, Rng& rng,
                                       double level = 0.95);

}  // namespace kcoddp::pipeline
