#include "kcoddp/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kcoddp/error.hpp"
#include "kcoddp/linalg.hpp"

namespace kcoddp::synthgen {

void GaussianSpec::validate() const {
  require(cov.rows() == mean.size() && cov.cols() == mean.size(),
          "GaussianSpec: covariance must be n x n");
  require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff()),
          "GaussianSpec: covariance must be symmetric");
}

Eigen::VectorXd mvn_sample(const GaussianSpec& spec, Rng& rng) {
  spec.validate();
  const auto n = spec.mean.size();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  if (n == 0) return spec.mean;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(spec.cov);
  require(ldlt.info() == Eigen::Success, "mvn_sample: factorization failed");
  Eigen::VectorXd d = ldlt.vectorD();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d[i] < -1e-8 * scale) throw NumericalError("mvn_sample: covariance is not positive semidefinite");
    d[i] = std::sqrt(std::max(d[i], 0.0));
  }
  const Eigen::MatrixXd L = ldlt.matrixL();
  Eigen::VectorXd w = L * d.cwiseProduct(z).eval();
  return spec.mean + (ldlt.transpositionsP().transpose() * w);
}

GaussianSpec gp_conditional(const GaussianSpec& joint, std::size_t n_first,
                            const Eigen::VectorXd& observed) {
  joint.validate();
  const auto n = joint.mean.size();
  const auto m = static_cast<Eigen::Index>(n_first);
  require(m <= n, "gp_conditional: n_first exceeds dimension");
  require(observed.size() == n - m, "gp_conditional: observed has the wrong length");
  const auto r = n - m;
  const Eigen::MatrixXd A11 = joint.cov.topLeftCorner(m, m);
  const Eigen::MatrixXd A12 = joint.cov.topRightCorner(m, r);
  const Eigen::MatrixXd A22 = joint.cov.bottomRightCorner(r, r);
  GaussianSpec out;
  if (r == 0) {
    out.mean = joint.mean.head(m);
    out.cov = A11;
    return out;
  }
  const linalg::JitteredCholesky chol(A22);
  const Eigen::VectorXd resid = observed - joint.mean.tail(r);
  out.mean = joint.mean.head(m) + A12 * chol.solve(resid);
  Eigen::MatrixXd cov = A11 - A12 * chol.solve(A12.transpose());
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

Eigen::MatrixXd exponential_covariance(const std::vector<model::SpaceTimePoint>& a,
                                       const std::vector<model::SpaceTimePoint>& b) {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double dt = a[i].t - b[j].t, d1 = a[i].s1 - b[j].s1, d2 = a[i].s2 - b[j].s2;
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::exp(-0.5 * std::sqrt(dt * dt + d1 * d1 + d2 * d2));
    }
  return A;
}

SyntheticData generate_synthetic(std::uint64_t seed, const SyntheticOptions& opt) {
  require(opt.n_holdout < opt.n_grid, "generate_synthetic: n_holdout must be < n_grid");
  require(opt.n_holdout >= 1, "generate_synthetic: n_holdout must be >= 1");
  require(opt.box_side > 0.0, "generate_synthetic: box_side must be positive");
  Rng rng(seed);
  const std::size_t n = opt.n_grid;

  // One time point in each interval (i-1, i], then uniform locations.
  std::vector<model::SpaceTimePoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i].t = static_cast<double>(i + 1) - rng.uniform();
  for (auto& p : pts) {
    p.s1 = rng.uniform(0.0, opt.box_side);
    p.s2 = rng.uniform(0.0, opt.box_side);
  }

  // Hold out n_holdout design points chosen without replacement.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < opt.n_holdout; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
  std::vector<std::size_t> held(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(opt.n_holdout));
  std::sort(held.begin(), held.end());
  std::vector<model::SpaceTimePoint> p5, p95;
  for (std::size_t i = 0, h = 0; i < n; ++i) {
    if (h < held.size() && held[h] == i) {
      p5.push_back(pts[i]);
      ++h;
    } else {
      p95.push_back(pts[i]);
    }
  }

  const auto mean_of = [&](const std::vector<model::SpaceTimePoint>& p) {
    Eigen::VectorXd mu(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i)
      mu[static_cast<Eigen::Index>(i)] =
          opt.beta[0] * p[i].t + opt.beta[1] * p[i].s1 + opt.beta[2] * p[i].s2;
    return mu;
  };

  const Eigen::MatrixXd A11 = exponential_covariance(p5, p5);
  const Eigen::VectorXd mu5 = mean_of(p5);
  const Eigen::VectorXd x5 = mvn_sample({mu5, A11}, rng);

  // Joint of (x95, x5), conditioned on x5.
  const auto m = static_cast<Eigen::Index>(p95.size());
  const auto h = static_cast<Eigen::Index>(p5.size());
  GaussianSpec joint;
  joint.mean.resize(m + h);
  joint.mean << mean_of(p95), mu5;
  joint.cov.resize(m + h, m + h);
  joint.cov.topLeftCorner(m, m) = exponential_covariance(p95, p95);
  joint.cov.topRightCorner(m, h) = exponential_covariance(p95, p5);
  joint.cov.bottomLeftCorner(h, m) = joint.cov.topRightCorner(m, h).transpose();
  joint.cov.bottomRightCorner(h, h) = A11;
  const GaussianSpec cond = gp_conditional(joint, static_cast<std::size_t>(m), x5);
  const Eigen::VectorXd x95 = mvn_sample(cond, rng);

  Eigen::MatrixXd Sy(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      Sy(i, j) = i == j ? 1.0 : std::exp(-0.5 * std::fabs(x95[i] - x95[j]));
  const Eigen::VectorXd y = mvn_sample({0.01 * x95, Sy}, rng);

  SyntheticData out;
  out.data.points = p95;
  out.data.y.assign(y.data(), y.data() + y.size());
  out.holdout = p5;
  out.x_holdout = x5;
  out.x_observed = x95;
  out.y_cov = Sy;
  return out;
}

}  // namespace kcoddp::synthgen
