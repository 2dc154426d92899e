#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "kcoddp/error.hpp"
#include "kcoddp/kernel.hpp"
#include "kcoddp/pipeline/cli.hpp"
#include "kcoddp/pipeline/config.hpp"
#include "kcoddp/pipeline/io.hpp"
#include "kcoddp/pipeline/loo.hpp"
#include "kcoddp/pipeline/predictive.hpp"
#include "kcoddp/pipeline/w126.hpp"
#include "kcoddp/synthgen.hpp"

using namespace kcoddp;
using namespace kcoddp::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("kcoddp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

HourlyOzoneSeries constant_series(double q, std::size_t days_per_month) {
  HourlyOzoneSeries s;
  for (int m = 1; m <= 7; ++m)
    for (std::size_t d = 0; d < days_per_month; ++d) {
      std::array<double, kDaylightHours> h;
      h.fill(q);
      s.q.push_back(h);
      s.month_of_day.push_back(m);
    }
  return s;
}

RunConfig quick_config() {
  RunConfig c;
  c.chain.n_iter = 300;
  c.chain.burn_in = 100;
  c.chain.thin = 2;
  c.chain.k_init = 3;
  auto& s = c.chain.scales;
  for (double* v : {&s.V, &s.z, &s.theta1, &s.theta2, &s.phi, &s.a_delta, &s.b_psi, &s.alpha, &s.lambda, &s.tau,
                    &s.sigma, &s.psi1, &s.psi2, &s.delta, &s.alpha0, &s.alpha1})
    *v = 0.01;
  return c;
}

}  // namespace

TEST_CASE("run configuration defaults") {
  const RunConfig c;
  CHECK(c.chain.k_init == 15);
  CHECK(c.hyper.k_max == 30);
  CHECK(c.hyper.b_lambda == 20.0);
  CHECK(c.hyper.A == 3.5);
  CHECK(c.hyper.uniform_lo == 3.0);
  CHECK(c.hyper.uniform_hi == 200.0);
  CHECK(c.chain.weights.birth == doctest::Approx(1.0 / 3.0));
  CHECK(c.chain.weights.death == doctest::Approx(1.0 / 3.0));
  CHECK(c.chain.weights.no_change == doctest::Approx(1.0 / 3.0));
  CHECK(c.chain.n_iter == 20000);
  CHECK(c.chain.burn_in == 5000);
  CHECK(c.chain.scales.V == 0.1);
  CHECK(c.chain.scales.delta == 0.1);
}

TEST_CASE("config text") {
  const auto m = parse_config_text("# comment\nseed = 9\n\n  n_iter=50 # trailing\nscale.V = 0.02\nsplit.z = 0.3\n");
  RunConfig c;
  apply_config(c, m);
  CHECK(c.seed == 9);
  CHECK(c.chain.n_iter == 50);
  CHECK(c.chain.scales.V == 0.02);
  CHECK(c.chain.scales.split_z == 0.3);
  CHECK_THROWS_AS(apply_config(c, parse_config_text("nope = 1\n")), ParseError);
  CHECK_THROWS_AS(apply_config(c, parse_config_text("n_iter = abc\n")), ParseError);
  CHECK_THROWS_AS(parse_config_text("just words\n"), ParseError);

  // every key survives a format/parse cycle
  c.hyper.b_lambda = 12.5;
  c.chain.tau_init = -0.25;
  RunConfig back;
  apply_config(back, parse_config_text(format_config(c)));
  CHECK(format_config(back) == format_config(c));
  CHECK(back.hyper.b_lambda == 12.5);
}

TEST_CASE("seed precedence") {
  RunConfig file;
  file.seed = 3;
  ::unsetenv(kSeedEnvVar);
  CHECK(resolve_seed(std::nullopt, file) == 3);
  ::setenv(kSeedEnvVar, "17", 1);
  CHECK(resolve_seed(std::nullopt, file) == 17);
  CHECK(resolve_seed(5, file) == 5);
  ::setenv(kSeedEnvVar, "x1", 1);
  CHECK_THROWS_AS(seed_from_env(), ParseError);
  ::unsetenv(kSeedEnvVar);
}

TEST_CASE("dataset CSV and scaling") {
  TempDir dir;
  const auto syn = synthgen::generate_synthetic(3);
  auto raw = syn.data;
  std::vector<double> cov;
  for (std::size_t i = 0; i < raw.size(); ++i) cov.push_back(1.0 + 0.1 * static_cast<double>(i));
  raw.covariate = cov;
  write_dataset_csv(dir / "d.csv", raw);
  const auto back = read_dataset_csv(dir / "d.csv");
  REQUIRE(back.size() == raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    CHECK(back.points[i] == raw.points[i]);
    CHECK(back.y[i] == raw.y[i]);
    CHECK((*back.covariate)[i] == cov[i]);
  }

  const auto loaded = load_dataset(dir / "d.csv", {.scale = true, .log_transform_regression = false});
  CHECK(loaded.data.regression());
  for (std::size_t d = 0; d < 3; ++d) {
    double m = 0.0, v = 0.0;
    const auto n = static_cast<double>(loaded.data.size());
    for (const auto& p : loaded.data.points) m += p[d] / n;
    for (const auto& p : loaded.data.points) v += (p[d] - m) * (p[d] - m) / (n - 1.0);
    CHECK(std::fabs(m) < 1e-10);
    CHECK(std::fabs(std::sqrt(v) - 1.0) < 1e-10);
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto p = loaded.scaling.invert(loaded.data.points[i]);
    for (std::size_t d = 0; d < 3; ++d) CHECK(std::fabs(p[d] - raw.points[i][d]) < 1e-12 * std::max(1.0, std::fabs(p[d])));
  }

  std::istringstream bad("s1,s2,t,y\n1,2,3,4\n1,2,x,4\n");
  try {
    read_dataset_csv(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  std::istringstream nan_row("s1,s2,t,y\n1,2,nan,4\n");
  CHECK_THROWS_AS(read_dataset_csv(nan_row), ParseError);
  std::istringstream bad_header("a,b,c\n");
  CHECK_THROWS_AS(read_dataset_csv(bad_header), ParseError);
  CHECK(split_csv_line("1,\"a,b\",3") == std::vector<std::string>{"1", "a,b", "3"});
}

TEST_CASE("samples CSV round trip") {
  const auto syn = synthgen::generate_synthetic(4, {.n_grid = 12, .n_holdout = 2});
  const auto ctx = model::make_context(prepare_dataset(syn.data).data, model::Hyper{}, 1.0, 5.0, 0.01);
  auto cfg = quick_config().chain;
  const auto archive = ttmcmc::run_chain(ctx, cfg, Rng(1));
  std::stringstream ss;
  write_samples_csv(ss, archive);
  const auto rows = read_samples_csv(ss);
  REQUIRE(rows.size() == archive.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = archive.rows[i];
    CHECK(a.iter == b.iter);
    CHECK(a.var.V == b.var.V);
    CHECK(a.var.z == b.var.z);
    CHECK(a.var.theta2 == b.var.theta2);
    CHECK(a.fixed.psi1 == b.fixed.psi1);
    CHECK(a.fixed.log_delta == b.fixed.log_delta);
    CHECK(a.fixed.sigma == b.fixed.sigma);
    CHECK(a.log_post == b.log_post);
  }
  std::ostringstream acc;
  write_acceptance_csv(acc, {archive});
  CHECK(acc.str().rfind("chain,move,proposed,accepted,rate,kept_proposed,kept_accepted,kept_rate\n", 0) == 0);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("w126 weight") {
  CHECK(w126_weight(0.0) == 0.0);
  CHECK(w126_weight(0.10) == doctest::Approx(0.09854).epsilon(5e-5));
  CHECK(w126_weight(0.05) == doctest::Approx(0.005503).epsilon(5e-4));
  CHECK(w126_weight(0.04) < 0.1 * 0.04);
  for (const double q : {0.10, 0.12, 0.2}) CHECK(w126_weight(q) > 0.98 * q);
  CHECK_THROWS_AS(w126_weight(-0.01), InvalidParameter);
}

TEST_CASE("w126 annual index") {
  const auto r = w126_annual(constant_series(0.10, 30));
  const double Z = 12.0 * w126_weight(0.10);
  CHECK(r.daily.front() == doctest::Approx(Z).epsilon(1e-14));
  CHECK(Z == doctest::Approx(1.1825).epsilon(1e-4));
  for (const double m : r.monthly) CHECK(m == doctest::Approx(35.474).epsilon(1e-4));
  CHECK(r.annual == doctest::Approx(106.42).epsilon(1e-4));
  CHECK(r.exceeds);

  const auto zero = w126_annual(constant_series(0.0, 30));
  CHECK(zero.annual == 0.0);
  CHECK_FALSE(zero.exceeds);

  // permuting days within a month
  auto s = constant_series(0.0, 30);
  Rng rng(1);
  for (auto& d : s.q)
    for (auto& h : d) h = rng.uniform(0.0, 0.15);
  const auto base = w126_annual(s);
  auto perm = s;
  std::reverse(perm.q.begin(), perm.q.begin() + 30);
  std::swap(perm.q[40], perm.q[55]);
  const auto pr = w126_annual(perm);
  for (std::size_t j = 0; j < 7; ++j) CHECK(pr.monthly[j] == doctest::Approx(base.monthly[j]).epsilon(1e-14));

  // monotone in every hourly value
  for (int rep = 0; rep < 100; ++rep) {
    auto up = s;
    for (auto& d : up.q)
      for (auto& h : d) h += rng.uniform(0.0, 0.02) * (rng.uniform() < 0.3);
    CHECK(w126_annual(up).annual >= base.annual);
  }

  // the running totals are three-month sums
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(base.running[j] == doctest::Approx(base.monthly[j] + base.monthly[j + 1] + base.monthly[j + 2]));

  auto missing = constant_series(0.1, 30);
  for (auto& m : missing.month_of_day)
    if (m == 4) m = 5;
  CHECK_THROWS_AS(w126_annual(missing), InvalidParameter);
  auto negative = constant_series(0.1, 30);
  negative.q[3][2] = -0.1;
  CHECK_THROWS_AS(w126_annual(negative), InvalidParameter);
}

TEST_CASE("hourly CSV") {
  const auto cal = calendar_month_map();
  CHECK(cal.size() == 214);
  CHECK(std::count(cal.begin(), cal.end(), 1) == 30);
  CHECK(std::count(cal.begin(), cal.end(), 2) == 31);
  CHECK(std::count(cal.begin(), cal.end(), 7) == 31);

  std::ostringstream csv;
  csv << "day,hour,q_ppm,month\n";
  for (int d = 1; d <= 210; ++d)
    for (int h = 1; h <= 12; ++h) csv << d << ',' << h << ",0.1," << (d - 1) / 30 + 1 << '\n';
  std::istringstream in(csv.str());
  const auto s = read_hourly_csv(in);
  CHECK(s.days() == 210);
  CHECK(w126_annual(s).annual == doctest::Approx(106.42).epsilon(1e-4));

  std::istringstream gap("day,hour,q_ppm,month\n1,1,0.1,1\n");
  CHECK_THROWS_AS(read_hourly_csv(gap), ParseError);
}

TEST_CASE("quantiles against a sort-based oracle") {
  Rng rng(5);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng.index(200);
    std::vector<double> d(n);
    for (auto& v : d) v = rng.normal();
    const auto s = summarize_draws(d);
    std::sort(d.begin(), d.end());
    const auto q = [&](double p) {
      const double h = (static_cast<double>(n) - 1.0) * p;
      const auto lo = static_cast<std::size_t>(h);
      return lo + 1 < n ? d[lo] + (h - static_cast<double>(lo)) * (d[lo + 1] - d[lo]) : d[lo];
    };
    CHECK(s.median == doctest::Approx(q(0.5)).epsilon(1e-14));
    CHECK(s.lower == doctest::Approx(q(0.025)).epsilon(1e-14));
    CHECK(s.upper == doctest::Approx(q(0.975)).epsilon(1e-14));
    CHECK(s.lower <= s.median);
    CHECK(s.median <= s.upper);
  }
  const auto c = summarize_draws(std::vector<double>(50, 2.5));
  CHECK(c.lower == 2.5);
  CHECK(c.median == 2.5);
  CHECK(c.upper == 2.5);
  CHECK(c.grid.size() == kDensityGridPoints);

  // the density integrates to about 1
  std::vector<double> d(2000);
  for (auto& v : d) v = rng.normal();
  const auto s = summarize_draws(d);
  double area = 0.0;
  for (std::size_t g = 1; g < s.grid.size(); ++g)
    area += 0.5 * (s.density[g] + s.density[g - 1]) * (s.grid[g] - s.grid[g - 1]);
  CHECK(area == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("predictive draw is f plus Gaussian noise") {
  const auto syn = synthgen::generate_synthetic(8, {.n_grid = 12, .n_holdout = 2});
  const auto ctx = model::make_context(prepare_dataset(syn.data).data, model::Hyper{}, 1.0, 5.0, 0.01);
  const auto archive = ttmcmc::run_chain(ctx, quick_config().chain, Rng(2));
  Rng rng(3);
  for (std::size_t r = 0; r < archive.rows.size(); r += 10) {
    const auto& row = archive.rows[r];
    // at a data site the conditional fields are the row's values
    const auto x = ctx.data.points[4];
    Rng a = rng, b = rng;
    const auto d = predictive_draw(ctx, row, x, std::nullopt, a);
    for (int i = 0; i < 3; ++i) b.normal();
    const double z = b.normal();
    CHECK(d.y == d.mean + row.fixed.sigma * z);
    const auto site = model::site_kernel(row.fixed.psi1[4], row.fixed.psi2[4], row.fixed.log_delta[4], row.fixed.phi, 3.5);
    CHECK(d.f == doctest::Approx(model::f_eval(x, site, row.var, row.fixed.tau)).epsilon(1e-5));
    rng = a;
  }
}

TEST_CASE("leave-one-out bookkeeping") {
  const auto syn = synthgen::generate_synthetic(9, {.n_grid = 8, .n_holdout = 2});
  const auto data = prepare_dataset(syn.data).data;
  auto cfg = quick_config();
  cfg.threads = 3;
  const auto rep = loo_cross_validation(data, cfg);
  REQUIRE(rep.folds.size() == data.size());
  std::size_t inc = 0;
  for (std::size_t i = 0; i < rep.folds.size(); ++i) {
    const auto& f = rep.folds[i];
    CHECK(f.index == i);
    CHECK_FALSE(f.failed);
    CHECK(f.y_observed == data.y[i]);
    CHECK(f.included == (f.summary.lower <= f.y_observed && f.y_observed <= f.summary.upper));
    CHECK(f.k_min >= 1);
    CHECK(f.k_max <= 30);
    inc += f.included;
  }
  CHECK(rep.n_included == inc);
  CHECK(rep.coverage == static_cast<double>(inc) / static_cast<double>(data.size()));

  cfg.threads = 1;
  const auto again = loo_cross_validation(data, cfg);
  for (std::size_t i = 0; i < rep.folds.size(); ++i) {
    CHECK(again.folds[i].summary.lower == rep.folds[i].summary.lower);
    CHECK(again.folds[i].summary.upper == rep.folds[i].summary.upper);
  }

  // a failing fold is recorded, not fatal
  auto broken = cfg;
  broken.chain.burn_in = broken.chain.n_iter;
  const auto bad = loo_cross_validation(data, broken);
  CHECK(bad.folds[0].failed);
  CHECK_FALSE(bad.folds[0].error.empty());
  CHECK(bad.coverage == 0.0);
}

TEST_CASE("command line") {
  TempDir dir;
  std::string text;
  CHECK(run_cli({"bound", "--M", "1", "--n", "1", "--alpha", "1", "--N", "10"}, &text) == 0);
  CHECK(std::stod(text) == doctest::Approx(4.0 * std::pow(1.0 / 3.0, 10) + 2.0 * std::sqrt(2.0 / M_PI) * std::pow(0.5, 10)).epsilon(1e-12));
  CHECK(run_cli({"bound", "--alpha", "1", "--tolerance", "1.7e-3"}, &text) == 0);
  CHECK(std::stoi(text) == 10);

  CHECK(run_cli({"simulate", "--seed", "7", "--n-grid", "20", "--out", dir / "a.csv"}) == 0);
  CHECK(run_cli({"simulate", "--seed", "7", "--n-grid", "20", "--out", dir / "b.csv"}) == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(read_dataset_csv(dir / "a.csv").size() == 15);

  CHECK(run_cli({"fit", "--data", dir / "a.csv", "--n-iter", "10", "--burn-in", "10", "--out-dir", dir / "fit"}) != 0);
  CHECK(run_cli({"fit", "--data", dir / "missing.csv"}) != 0);
  CHECK(run_cli({"fit", "--bogus"}) != 0);
  CHECK(run_cli({"teleport"}) != 0);

  std::ofstream(dir / "run.cfg") << "n_iter = 60\nburn_in = 20\nthin = 5\nk_init = 3\nscale.V = 0.01\n";
  CHECK(run_cli({"fit", "--data", dir / "a.csv", "--config", dir / "run.cfg", "--chains", "2", "--out-dir", dir / "fit"}) == 0);
  CHECK(fs::exists(dir / "fit/samples_0.csv"));
  CHECK(fs::exists(dir / "fit/samples_1.csv"));
  CHECK(fs::exists(dir / "fit/acceptance.csv"));
  CHECK(read_samples_csv(dir / "fit/samples_1.csv").size() == 8);

  std::ofstream(dir / "pts.csv") << "s1,s2,t\n10,20,3.5\n";
  CHECK(run_cli({"predict", "--data", dir / "a.csv", "--samples", dir / "fit/samples_0.csv", "--points", dir / "pts.csv",
                 "--out-dir", dir / "pred"}) == 0);
  CHECK(fs::exists(dir / "pred/predictive_summary.csv"));
  CHECK(fs::exists(dir / "pred/predictive_0.csv"));

  CHECK(run_cli({"corr", "--n-points", "3", "--n-configs", "20", "--out", dir / "c.csv"}) == 0);
  CHECK(slurp(dir / "c.csv").rfind("separation,estimate,std_error\n", 0) == 0);

  {
    std::ofstream h(dir / "h.csv");
    h << "day,hour,q_ppm\n";
    for (int d = 1; d <= 214; ++d)
      for (int hr = 1; hr <= 12; ++hr) h << d << ',' << hr << ",0\n";
  }
  CHECK(run_cli({"w126", "--hourly", dir / "h.csv"}, &text) == 0);
  CHECK(text.find('0') != std::string::npos);
}
