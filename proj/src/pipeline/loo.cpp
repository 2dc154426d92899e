#include "kcoddp/pipeline/loo.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include "kcoddp/error.hpp"
#include "kcoddp/pipeline/io.hpp"

namespace kcoddp::pipeline {

namespace {

constexpr std::uint64_t kPredictiveStream = 1ULL << 32;

LooFold run_fold(const model::Dataset& data, const RunConfig& config, std::size_t i) {
  LooFold fold;
  fold.index = i;
  fold.y_observed = data.y[i];
  try {
    const Rng master(config.seed);
    const auto ctx = model::make_context(data.without(i), config.hyper, config.chain.alpha_init,
                                         config.chain.lambda_init, config.epsilon);
    const auto archive = ttmcmc::run_chain(ctx, config.chain, master.derive(i), i);
    fold.counts = archive.counts;
    fold.counts_kept = archive.counts_kept;
    fold.k_min = *std::min_element(archive.k_trace.begin(), archive.k_trace.end());
    fold.k_max = *std::max_element(archive.k_trace.begin(), archive.k_trace.end());
    Rng pred = master.derive(kPredictiveStream + i);
    std::optional<double> cov;
    if (data.regression()) cov = (*data.covariate)[i];
    fold.summary = posterior_predictive(ctx, archive.rows, data.points[i], cov, pred);
    fold.included = fold.summary.lower <= fold.y_observed && fold.y_observed <= fold.summary.upper;
  } catch (const std::exception& e) {
    fold.failed = true;
    fold.error = e.what();
  }
  return fold;
}

}  // namespace

CoverageReport loo_cross_validation(const model::Dataset& data, const RunConfig& config) {
  require(data.size() >= 3, "loo: need at least 3 observations");
  const std::size_t n = data.size();
  CoverageReport report;
  report.folds.resize(n);
  const std::size_t threads = std::max<std::size_t>(1, config.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) report.folds[i] = run_fold(data, config, i);
  } else {
    for (std::size_t start = 0; start < n; start += threads) {
      std::vector<std::thread> pool;
      for (std::size_t i = start; i < std::min(n, start + threads); ++i)
        pool.emplace_back([&, i] { report.folds[i] = run_fold(data, config, i); });
      for (auto& t : pool) t.join();
    }
  }
  for (const auto& f : report.folds)
    if (f.included) ++report.n_included;
  report.coverage = static_cast<double>(report.n_included) / static_cast<double>(n);
  return report;
}

void write_loo_report(const std::string& path, const CoverageReport& report) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << "index,y,lower,median,upper,included,failed,k_min,k_max,rate_birth,rate_death,"
         "rate_no_change,kept_rate_birth,kept_rate_death,kept_rate_no_change,error\n";
  for (const auto& f : report.folds) {
    std::string err = f.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    out << f.index << ',' << format_double(f.y_observed) << ',' << format_double(f.summary.lower)
        << ',' << format_double(f.summary.median) << ',' << format_double(f.summary.upper) << ','
        << (f.included ? 1 : 0) << ',' << (f.failed ? 1 : 0) << ',' << f.k_min << ',' << f.k_max;
    for (const auto* c : {&f.counts, &f.counts_kept})
      for (const auto t : {ttmcmc::MoveType::birth, ttmcmc::MoveType::death, ttmcmc::MoveType::no_change})
        out << ',' << format_double(c->rate(t));
    out << ",\"" << err << "\"\n";
  }
}

}  // namespace kcoddp::pipeline
