#include "kcoddp/pipeline/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "kcoddp/covariance.hpp"
#include "kcoddp/error.hpp"
#include "kcoddp/oddp.hpp"
#include "kcoddp/pipeline/config.hpp"
#include "kcoddp/pipeline/io.hpp"
#include "kcoddp/pipeline/loo.hpp"
#include "kcoddp/pipeline/predictive.hpp"
#include "kcoddp/pipeline/w126.hpp"
#include "kcoddp/synthgen.hpp"

namespace kcoddp::pipeline {

namespace fs = std::filesystem;

namespace {

struct RunFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_iter, burn_in, thin, chains, threads;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--config", f.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "master seed (overrides the environment and the config file)");
  app->add_option("--n-iter", f.n_iter, "MCMC iterations");
  app->add_option("--burn-in", f.burn_in, "iterations discarded before retaining samples");
  app->add_option("--thin", f.thin, "keep every thin-th iteration after burn-in");
  app->add_option("--chains", f.chains, "independent chains");
  app->add_option("--threads", f.threads, "worker threads");
}

RunConfig resolve_config(const RunFlags& f) {
  RunConfig c;
  if (!f.config_path.empty()) apply_config(c, read_config_file(f.config_path));
  c.seed = resolve_seed(f.seed, c);
  if (f.n_iter) c.chain.n_iter = *f.n_iter;
  if (f.burn_in) c.chain.burn_in = *f.burn_in;
  if (f.thin) c.chain.thin = *f.thin;
  if (f.chains) c.n_chains = *f.chains;
  if (f.threads) c.threads = *f.threads;
  if (c.chain.n_iter <= c.chain.burn_in)
    throw InvalidParameter("n_iter must exceed burn_in");
  return c;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ParseError("cannot create directory '" + dir + "': " + ec.message());
}

std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel convolution of an order-based dependent Dirichlet process", "kcoddp"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  std::optional<std::uint64_t> sim_seed;
  synthgen::SyntheticOptions sim_opt;
  std::string sim_out = "synthetic.csv", sim_holdout;
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--n-grid", sim_opt.n_grid, "design points before hold-out")->capture_default_str();
  sim->add_option("--n-holdout", sim_opt.n_holdout, "points held out")->capture_default_str();
  sim->add_option("--box-side", sim_opt.box_side, "side of the square location domain")->capture_default_str();
  sim->add_option("--out", sim_out, "output CSV (s1,s2,t,y)")->capture_default_str();
  sim->add_option("--holdout-out", sim_holdout, "optional CSV (s1,s2,t) of the held-out design points");

  // fit
  auto* fit = app.add_subcommand("fit", "run TTMCMC chains on a dataset");
  RunFlags fit_flags;
  std::string fit_data, fit_dir = ".";
  fit->add_option("--data", fit_data, "input CSV s1,s2,t,y[,x_cmaq]")->required()->check(CLI::ExistingFile);
  fit->add_option("--out-dir", fit_dir, "output directory")->capture_default_str();
  add_run_flags(fit, fit_flags);

  // loo
  auto* loo = app.add_subcommand("loo", "leave-one-out cross-validation");
  RunFlags loo_flags;
  std::string loo_data, loo_dir = ".";
  loo->add_option("--data", loo_data, "input CSV")->required()->check(CLI::ExistingFile);
  loo->add_option("--out-dir", loo_dir, "output directory")->capture_default_str();
  add_run_flags(loo, loo_flags);

  // predict
  auto* pred = app.add_subcommand("predict", "posterior predictive summaries at new points");
  RunFlags pred_flags;
  std::string pred_data, pred_points, pred_dir = ".";
  std::vector<std::string> pred_samples;
  pred->add_option("--data", pred_data, "the dataset the samples were fitted on")->required()->check(CLI::ExistingFile);
  pred->add_option("--samples", pred_samples, "samples_<chain>.csv files")->required()->check(CLI::ExistingFile);
  pred->add_option("--points", pred_points, "CSV s1,s2,t[,x_cmaq] in data units")->required()->check(CLI::ExistingFile);
  pred->add_option("--out-dir", pred_dir, "output directory")->capture_default_str();
  add_run_flags(pred, pred_flags);

  // corr
  auto* corr = app.add_subcommand("corr", "unconditional correlation against separation");
  double corr_alpha = 1.0, corr_lambda = 10.0, corr_phi = 5.0, corr_max = 1.6, corr_min = 1e-3;
  std::size_t corr_configs = 1000, corr_points = 8;
  std::optional<std::uint64_t> corr_seed;
  std::string corr_out = "corr_sweep.csv";
  corr->add_option("--alpha", corr_alpha, "DP concentration")->capture_default_str();
  corr->add_option("--lambda", corr_lambda, "Poisson intensity on the box [-1,1]^3")->capture_default_str();
  corr->add_option("--phi", corr_phi, "kernel scale")->capture_default_str();
  corr->add_option("--min-sep", corr_min, "smallest separation")->capture_default_str();
  corr->add_option("--max-sep", corr_max, "largest separation")->capture_default_str();
  corr->add_option("--n-points", corr_points, "log-spaced separations")->capture_default_str();
  corr->add_option("--n-configs", corr_configs, "Poisson configurations per separation")->capture_default_str();
  corr->add_option("--seed", corr_seed, "master seed");
  corr->add_option("--out", corr_out, "output CSV")->capture_default_str();

  // bound
  auto* bound = app.add_subcommand("bound", "truncation bound of the data marginal");
  double b_M = 1.0, b_alpha = 1.0;
  std::size_t b_n = 1, b_N = 10;
  std::optional<double> b_tol;
  bound->add_option("--M", b_M, "kernel bound")->capture_default_str();
  bound->add_option("--n", b_n, "number of observations")->capture_default_str();
  bound->add_option("--alpha", b_alpha, "DP concentration")->capture_default_str();
  bound->add_option("--N", b_N, "truncation level")->capture_default_str();
  bound->add_option("--tolerance", b_tol, "print the smallest N meeting this bound instead");

  // w126
  auto* w126 = app.add_subcommand("w126", "annual W126 ozone index");
  std::string w_path;
  w126->add_option("--hourly", w_path, "CSV day,hour,q_ppm[,month]")->required()->check(CLI::ExistingFile);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*sim) {
      const std::uint64_t seed = sim_seed ? *sim_seed : seed_from_env().value_or(RunConfig{}.seed);
      const auto s = synthgen::generate_synthetic(seed, sim_opt);
      write_dataset_csv(sim_out, s.data);
      if (!sim_holdout.empty()) {
        std::ofstream h(sim_holdout);
        if (!h) throw ParseError("cannot open '" + sim_holdout + "' for writing");
        h << "s1,s2,t\n";
        for (const auto& p : s.holdout)
          h << format_double(p.s1) << ',' << format_double(p.s2) << ',' << format_double(p.t) << '\n';
      }
      out << "wrote " << s.data.size() << " rows to " << sim_out << "\n";
    } else if (*fit) {
      const auto cfg = resolve_config(fit_flags);
      const auto loaded = load_dataset(fit_data);
      const auto ctx = model::make_context(loaded.data, cfg.hyper, cfg.chain.alpha_init,
                                           cfg.chain.lambda_init, cfg.epsilon);
      const auto archives = ttmcmc::run_chains(ctx, cfg.chain, cfg.n_chains, cfg.seed, cfg.threads);
      ensure_dir(fit_dir);
      for (const auto& a : archives)
        write_samples_csv(path_in(fit_dir, "samples_" + std::to_string(a.chain_id) + ".csv"), a);
      write_acceptance_csv(path_in(fit_dir, "acceptance.csv"), archives);
      std::ofstream(path_in(fit_dir, "config_used.txt")) << format_config(cfg);
      for (const auto& a : archives)
        out << "chain " << a.chain_id << ": " << a.rows.size() << " samples, acceptance birth "
            << a.counts.rate(ttmcmc::MoveType::birth) << " death "
            << a.counts.rate(ttmcmc::MoveType::death) << " no_change "
            << a.counts.rate(ttmcmc::MoveType::no_change) << "\n";
    } else if (*loo) {
      const auto cfg = resolve_config(loo_flags);
      const auto loaded = load_dataset(loo_data);
      const auto report = loo_cross_validation(loaded.data, cfg);
      ensure_dir(loo_dir);
      write_loo_report(path_in(loo_dir, "loo_report.csv"), report);
      out << "coverage " << report.n_included << "/" << report.folds.size() << " = "
          << format_double(report.coverage) << "\n";
    } else if (*pred) {
      const auto cfg = resolve_config(pred_flags);
      const auto loaded = load_dataset(pred_data);
      const auto ctx = model::make_context(loaded.data, cfg.hyper, cfg.chain.alpha_init,
                                           cfg.chain.lambda_init, cfg.epsilon);
      std::vector<ttmcmc::SampleRow> rows;
      for (const auto& p : pred_samples) {
        auto r = read_samples_csv(p);
        rows.insert(rows.end(), r.begin(), r.end());
      }
      if (rows.empty()) throw InvalidParameter("predict: the sample files hold no rows");
      for (const auto& r : rows)
        if (r.fixed.psi1.size() != ctx.data.size())
          throw InvalidParameter("predict: samples do not match the dataset size");

      std::ifstream pin(pred_points);
      std::string line;
      std::getline(pin, line);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto header = split_csv_line(line);
      if (header.size() < 3 || header[0] != "s1" || header[1] != "s2" || header[2] != "t")
        throw ParseError("points: header must be s1,s2,t[,x_cmaq]");
      const bool has_cov = header.size() == 4;
      ensure_dir(pred_dir);
      std::ofstream summary(path_in(pred_dir, "predictive_summary.csv"));
      summary << "point,s1,s2,t,n_draws,mean,median,lower,upper\n";
      const Rng master(cfg.seed);
      std::size_t point = 0;
      while (std::getline(pin, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size())
          throw ParseError("points: row " + std::to_string(point + 2) + ": wrong number of fields");
        const auto num = [&](const std::string& v) {
          try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos == v.size() && std::isfinite(d)) return d;
          } catch (const std::exception&) {
          }
          throw ParseError("points: row " + std::to_string(point + 2) + ": not a number: '" + v + "'");
        };
        model::SpaceTimePoint raw{num(f[0]), num(f[1]), num(f[2])};
        std::optional<double> cov;
        if (has_cov) {
          cov = num(f[3]);
          if (loaded.log_transformed) {
            if (!(*cov > 0.0)) throw ParseError("points: x_cmaq must be positive");
            cov = std::log(*cov);
          }
        }
        if (ctx.data.regression() && !cov) throw ParseError("points: regression fit needs x_cmaq");
        Rng rng = master.derive(point);
        const auto s = posterior_predictive(ctx, rows, loaded.scaling.apply(raw), cov, rng);
        summary << point << ',' << format_double(raw.s1) << ',' << format_double(raw.s2) << ','
                << format_double(raw.t) << ',' << s.n_draws << ',' << format_double(s.mean) << ','
                << format_double(s.median) << ',' << format_double(s.lower) << ','
                << format_double(s.upper) << '\n';
        std::ofstream grid(path_in(pred_dir, "predictive_" + std::to_string(point) + ".csv"));
        grid << "y,density\n";
        for (std::size_t g = 0; g < s.grid.size(); ++g)
          grid << format_double(s.grid[g]) << ',' << format_double(s.density[g]) << '\n';
        ++point;
      }
      out << "wrote predictive summaries for " << point << " points to " << pred_dir << "\n";
    } else if (*corr) {
      if (corr_points < 2 || !(corr_min > 0.0) || !(corr_max > corr_min))
        throw InvalidParameter("corr: need n-points >= 2 and 0 < min-sep < max-sep");
      const std::uint64_t seed = corr_seed ? *corr_seed : seed_from_env().value_or(RunConfig{}.seed);
      geometry::ComputationalBox box;
      box.lower = {-1.0, -1.0, -1.0};
      box.upper = {1.0, 1.0, 1.0};
      const auto sh = kernel::sigma_half(0.0, 0.0, corr_phi);
      std::ofstream csv(corr_out);
      if (!csv) throw ParseError("cannot open '" + corr_out + "' for writing");
      csv << "separation,estimate,std_error\n";
      const Rng master(seed);
      for (std::size_t i = 0; i < corr_points; ++i) {
        const double sep = corr_min * std::pow(corr_max / corr_min, static_cast<double>(i) /
                                                                      static_cast<double>(corr_points - 1));
        const model::SpaceTimePoint x1{-0.5 * sep, 0.0, 0.0}, x2{0.5 * sep, 0.0, 0.0};
        const covariance::KernelSite k1{x1, sh, 1.0, 0.0}, k2{x2, sh, 1.0, 0.0};
        const auto m = covariance::kernel_moments_exact(k1, k2, 0.0);
        const auto e = covariance::unconditional_corr_mc(x1, x2, corr_alpha, corr_lambda, box, m,
                                                         corr_configs, master.derive(i));
        csv << format_double(sep) << ',' << format_double(e.estimate) << ','
            << format_double(e.std_error) << '\n';
      }
      out << "wrote " << corr_points << " separations to " << corr_out << "\n";
    } else if (*bound) {
      if (b_tol) {
        out << oddp::smallest_N_for_bound(b_M, b_n, b_alpha, *b_tol) << "\n";
      } else {
        out << format_double(oddp::truncation_bound({b_M, b_n, b_alpha, b_N})) << "\n";
      }
    } else if (*w126) {
      const auto r = w126_annual(read_hourly_csv(w_path));
      out << "annual " << format_double(r.annual) << "\nexceeds " << (r.exceeds ? "yes" : "no") << "\n";
      for (std::size_t j = 0; j < r.monthly.size(); ++j)
        out << "month " << j + 1 << " " << format_double(r.monthly[j]) << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cli_dispatch(int argc, char** argv) {
  return cli_dispatch(std::vector<std::string>(argv + std::min(argc, 1), argv + argc), std::cout, std::cerr);
}

}  // namespace kcoddp::pipeline
