#pragma once

#include <string>
#include <vector>

#include "kcoddp/model.hpp"
#include "kcoddp/pipeline/config.hpp"
#include "kcoddp/pipeline/predictive.hpp"

namespace kcoddp::pipeline {

struct LooFold {
  std::size_t index = 0;
  double y_observed = 0.0;
  PredictiveSummary summary;
  ttmcmc::AcceptanceCounts counts;       // whole chain
  ttmcmc::AcceptanceCounts counts_kept;  // after burn-in
  std::size_t k_min = 0;
  std::size_t k_max = 0;
  bool included = false;
  bool failed = false;
  std::string error;
};

struct CoverageReport {
  std::vector<LooFold> folds;
  std::size_t n_included = 0;
  double coverage = 0.0;  // n_included / number of folds; failed folds count as misses
};

/// Fold i fits a chain on the data without row i (stream seed.derive(i)) and
/// checks whether y_i lies in the equal-tailed 95% predictive interval.
/// A failing fold is recorded, not rethrown.
CoverageReport loo_cross_validation(const model::Dataset& data, const RunConfig& config);

/// index,y,lower,median,upper,included,failed,k_min,k_max, whole-chain and
/// post-burn-in rates per move type, error
void write_loo_report(const std::string& path, const CoverageReport& report);

}  // namespace kcoddp::pipeline
