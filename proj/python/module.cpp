#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kcoddp/chain.hpp"
#include "kcoddp/covariance.hpp"
#include "kcoddp/error.hpp"
#include "kcoddp/geometry.hpp"
#include "kcoddp/kernel.hpp"
#include "kcoddp/oddp.hpp"
#include "kcoddp/pipeline/cli.hpp"
#include "kcoddp/pipeline/config.hpp"
#include "kcoddp/pipeline/io.hpp"
#include "kcoddp/pipeline/loo.hpp"
#include "kcoddp/pipeline/w126.hpp"
#include "kcoddp/synthgen.hpp"

namespace py = pybind11;
using namespace kcoddp;

namespace {

pipeline::RunConfig make_config(const py::dict& entries, std::optional<std::uint64_t> seed) {
  pipeline::ConfigMap map;
  for (const auto& [k, v] : entries) map[py::str(k)] = py::str(v);
  pipeline::RunConfig cfg;
  pipeline::apply_config(cfg, map);
  if (seed) cfg.seed = *seed;
  return cfg;
}

model::Dataset make_dataset(const std::vector<double>& s1, const std::vector<double>& s2,
                            const std::vector<double>& t, const std::vector<double>& y,
                            const std::optional<std::vector<double>>& covariate) {
  if (s2.size() != s1.size() || t.size() != s1.size() || y.size() != s1.size() ||
      (covariate && covariate->size() != s1.size()))
    throw InvalidParameter("s1, s2, t, y (and covariate) must have the same length");
  model::Dataset d;
  for (std::size_t i = 0; i < s1.size(); ++i) d.points.push_back({s1[i], s2[i], t[i]});
  d.y = y;
  d.covariate = covariate;
  return d;
}

py::dict rates(const ttmcmc::AcceptanceCounts& c) {
  py::dict d;
  for (const auto t : {ttmcmc::MoveType::birth, ttmcmc::MoveType::death, ttmcmc::MoveType::no_change})
    d[py::str(std::string(ttmcmc::move_name(t)))] = c.rate(t);
  return d;
}

}  // namespace

PYBIND11_MODULE(_kcoddp, m) {
  m.doc() = "Kernel convolution with an order-based dependent Dirichlet process";

  // stick-breaking and truncation
  m.def("tail_moment_T", &oddp::tail_moment_T, py::arg("N"), py::arg("r"), py::arg("alpha"),
        "E[(sum_{k>=N} p_k)^r]");
  m.def("tail_moment_U", &oddp::tail_moment_U, py::arg("N"), py::arg("r"), py::arg("alpha"),
        "E[sum_{k>=N} p_k^r]");
  m.def(
      "truncation_bound",
      [](double M, std::size_t n, double alpha, std::size_t N) {
        return oddp::truncation_bound({M, n, alpha, N});
      },
      py::arg("M"), py::arg("n"), py::arg("alpha"), py::arg("N"));
  m.def("smallest_N_for_bound", &oddp::smallest_N_for_bound, py::arg("M"), py::arg("n"),
        py::arg("alpha"), py::arg("tolerance"));
  m.def("stick_weights", &oddp::stick_weights, py::arg("fractions"));
  m.def(
      "sample_sticks",
      [](double alpha, std::size_t K, std::uint64_t seed) {
        Rng rng(seed);
        return oddp::sample_sticks(alpha, K, rng);
      },
      py::arg("alpha"), py::arg("K"), py::arg("seed"));

  // geometry and correlation
  m.def("region_margin", &geometry::region_margin, py::arg("alpha"), py::arg("lambda_"),
        py::arg("epsilon"), py::arg("d"));
  m.def("corr_G_normalized", &covariance::corr_G_normalized, py::arg("alpha"), py::arg("ord1"),
        py::arg("ord2"));
  m.def(
      "unconditional_corr",
      [](double separation, double alpha, double lambda, double phi, std::size_t n_configs,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        geometry::ComputationalBox box;
        box.lower = {-1.0, -1.0, -1.0};
        box.upper = {1.0, 1.0, 1.0};
        const auto sh = kernel::sigma_half(0.0, 0.0, phi);
        const geometry::SpaceTimePoint x1{-0.5 * separation, 0.0, 0.0}, x2{0.5 * separation, 0.0, 0.0};
        const covariance::KernelSite k1{x1, sh, 1.0, 0.0}, k2{x2, sh, 1.0, 0.0};
        const auto e = covariance::unconditional_corr_mc(
            x1, x2, alpha, lambda, box, covariance::kernel_moments_exact(k1, k2, 0.0), n_configs, Rng(seed));
        return std::make_pair(e.estimate, e.std_error);
      },
      py::arg("separation"), py::arg("alpha") = 1.0, py::arg("lambda_") = 10.0, py::arg("phi") = 5.0,
      py::arg("n_configs") = 1000, py::arg("seed") = 1,
      "Correlation of f at (-sep/2, 0, 0) and (sep/2, 0, 0) on the box [-1, 1]^3; (estimate, se).");

  // ozone index
  m.def("w126_weight", &pipeline::w126_weight, py::arg("q"));
  m.def(
      "w126_annual",
      [](const std::vector<std::vector<double>>& hourly, std::optional<std::vector<int>> months) {
        pipeline::HourlyOzoneSeries s;
        for (const auto& day : hourly) {
          if (day.size() != pipeline::kDaylightHours)
            throw InvalidParameter("every day needs 12 hourly values");
          std::array<double, pipeline::kDaylightHours> a;
          std::copy(day.begin(), day.end(), a.begin());
          s.q.push_back(a);
        }
        s.month_of_day = months ? *months : pipeline::calendar_month_map();
        const auto r = pipeline::w126_annual(s);
        py::dict d;
        d["daily"] = r.daily;
        d["monthly"] = std::vector<double>(r.monthly.begin(), r.monthly.end());
        d["annual"] = r.annual;
        d["exceeds"] = r.exceeds;
        return d;
      },
      py::arg("hourly"), py::arg("months") = py::none(),
      "hourly: days x 12 concentrations (ppm); months: season month 1..7 per day.");

  // data, fitting and validation
  m.def(
      "simulate",
      [](std::uint64_t seed, std::size_t n_grid, std::size_t n_holdout, double box_side) {
        synthgen::SyntheticOptions opt;
        opt.n_grid = n_grid;
        opt.n_holdout = n_holdout;
        opt.box_side = box_side;
        const auto s = synthgen::generate_synthetic(seed, opt);
        std::vector<double> s1, s2, t, h1, h2, ht;
        for (const auto& p : s.data.points) {
          s1.push_back(p.s1);
          s2.push_back(p.s2);
          t.push_back(p.t);
        }
        for (const auto& p : s.holdout) {
          h1.push_back(p.s1);
          h2.push_back(p.s2);
          ht.push_back(p.t);
        }
        py::dict d;
        d["s1"] = s1;
        d["s2"] = s2;
        d["t"] = t;
        d["y"] = s.data.y;
        d["holdout_s1"] = h1;
        d["holdout_s2"] = h2;
        d["holdout_t"] = ht;
        return d;
      },
      py::arg("seed"), py::arg("n_grid") = 100, py::arg("n_holdout") = 5, py::arg("box_side") = 50.0);

  m.def(
      "fit",
      [](const std::vector<double>& s1, const std::vector<double>& s2, const std::vector<double>& t,
         const std::vector<double>& y, const py::dict& config, std::optional<std::uint64_t> seed,
         std::optional<std::vector<double>> covariate) {
        const auto cfg = make_config(config, seed);
        auto raw = make_dataset(s1, s2, t, y, covariate);
        std::vector<ttmcmc::SampleArchive> archives;
        {
          py::gil_scoped_release release;
          const auto loaded = pipeline::prepare_dataset(std::move(raw));
          const auto ctx = model::make_context(loaded.data, cfg.hyper, cfg.chain.alpha_init,
                                               cfg.chain.lambda_init, cfg.epsilon);
          archives = ttmcmc::run_chains(ctx, cfg.chain, cfg.n_chains, cfg.seed, cfg.threads);
        }
        py::list out;
        for (const auto& a : archives) {
          std::vector<double> alpha, lambda, sigma, log_post;
          std::vector<std::size_t> k;
          for (const auto& r : a.rows) {
            k.push_back(r.var.k());
            alpha.push_back(r.fixed.alpha);
            lambda.push_back(r.fixed.lambda);
            sigma.push_back(r.fixed.sigma);
            log_post.push_back(r.log_post);
          }
          py::dict d;
          d["chain"] = a.chain_id;
          d["k"] = k;
          d["alpha"] = alpha;
          d["lambda"] = lambda;
          d["sigma"] = sigma;
          d["log_post"] = log_post;
          d["k_trace"] = a.k_trace;
          d["acceptance"] = rates(a.counts);
          d["acceptance_kept"] = rates(a.counts_kept);
          out.append(d);
        }
        return out;
      },
      py::arg("s1"), py::arg("s2"), py::arg("t"), py::arg("y"), py::arg("config") = py::dict(),
      py::arg("seed") = py::none(), py::arg("covariate") = py::none(),
      "Runs the chains on the scaled data; config takes the same keys as a config file.");

  m.def(
      "loo",
      [](const std::vector<double>& s1, const std::vector<double>& s2, const std::vector<double>& t,
         const std::vector<double>& y, const py::dict& config, std::optional<std::uint64_t> seed,
         std::optional<std::vector<double>> covariate) {
        const auto cfg = make_config(config, seed);
        auto raw = make_dataset(s1, s2, t, y, covariate);
        pipeline::CoverageReport report;
        {
          py::gil_scoped_release release;
          report = pipeline::loo_cross_validation(pipeline::prepare_dataset(std::move(raw)).data, cfg);
        }
        py::list folds;
        for (const auto& f : report.folds) {
          py::dict d;
          d["index"] = f.index;
          d["y"] = f.y_observed;
          d["lower"] = f.summary.lower;
          d["median"] = f.summary.median;
          d["upper"] = f.summary.upper;
          d["included"] = f.included;
          d["failed"] = f.failed;
          d["k_min"] = f.k_min;
          d["k_max"] = f.k_max;
          d["acceptance"] = rates(f.counts);
          d["error"] = f.error;
          folds.append(d);
        }
        py::dict d;
        d["coverage"] = report.coverage;
        d["n_included"] = report.n_included;
        d["folds"] = folds;
        return d;
      },
      py::arg("s1"), py::arg("s2"), py::arg("t"), py::arg("y"), py::arg("config") = py::dict(),
      py::arg("seed") = py::none(), py::arg("covariate") = py::none(),
      "Leave-one-out 95% predictive coverage. With a covariate, y and the intervals are on the log scale.");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = pipeline::cli_dispatch(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a kcoddp subcommand; returns (exit code, stdout, stderr).");

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
}
