#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "kcoddp/chain.hpp"
#include "kcoddp/model.hpp"

namespace kcoddp::pipeline {

/// Centre and scale of s1, s2, t (sample sd, denominator n - 1).
struct Scaling {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  std::array<double, 3> scale{1.0, 1.0, 1.0};

  model::SpaceTimePoint apply(const model::SpaceTimePoint& p) const;
  model::SpaceTimePoint invert(const model::SpaceTimePoint& p) const;
};

struct LoadOptions {
  bool scale = true;
  /// With a covariate column, model log y on log x_cmaq.
  bool log_transform_regression = true;
};

struct LoadedData {
  model::Dataset data;  // model-ready (scaled, possibly log-transformed)
  model::Dataset raw;   // as read
  Scaling scaling;
  bool log_transformed = false;
};

/// Splits one CSV line; double-quoted fields may contain commas.
std::vector<std::string> split_csv_line(const std::string& line);

/// Header s1,s2,t,y[,x_cmaq]; errors carry the row number.
model::Dataset read_dataset_csv(std::istream& in);
model::Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const model::Dataset& data);
void write_dataset_csv(const std::string& path, const model::Dataset& data);

Scaling fit_scaling(const model::Dataset& data);
model::Dataset apply_scaling(const model::Dataset& data, const Scaling& scaling);

LoadedData prepare_dataset(model::Dataset raw, const LoadOptions& options = {});
LoadedData load_dataset(const std::string& path, const LoadOptions& options = {});

/// iter,k, quoted ';'-joined blocks, fixed parameters (fields quoted), log_post.
void write_samples_csv(std::ostream& out, const ttmcmc::SampleArchive& archive);
void write_samples_csv(const std::string& path, const ttmcmc::SampleArchive& archive);
std::vector<ttmcmc::SampleRow> read_samples_csv(std::istream& in);
std::vector<ttmcmc::SampleRow> read_samples_csv(const std::string& path);

/// chain,move,proposed,accepted,rate, then the same three after burn-in
void write_acceptance_csv(std::ostream& out, const std::vector<ttmcmc::SampleArchive>& archives);
void write_acceptance_csv(const std::string& path,
                          const std::vector<ttmcmc::SampleArchive>& archives);

/// %.17g
std::string format_double(double v);

}  // namespace kcoddp::pipeline
