#include "kcoddp/ttmcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kcoddp/error.hpp"

namespace kcoddp::ttmcmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_std_normal(double x) {
  return -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * x * x;
}

std::vector<int> draw_signs(std::size_t n, Rng& rng) {
  std::vector<int> s(n);
  for (auto& v : s) v = rng.sign();
  return s;
}

void move_fixed(std::vector<double>& fixed, const MoveDraw& draw, const MoveScales& scales) {
  for (std::size_t i = 0; i < fixed.size(); ++i)
    fixed[i] += draw.zeta_fixed[i] * scales.fixed[i] * draw.eps_fixed;
}

void check_draw(const TransState& x, const MoveDraw& draw, const MoveScales& scales) {
  scales.validate(x.blocks.size(), x.fixed.size());
  require(draw.zeta.size() == x.blocks.size(), "move draw: one zeta vector per block");
  require(draw.zeta_fixed.size() == x.fixed.size(), "move draw: one zeta per fixed coordinate");
  for (const auto& b : x.blocks) require(b.size() == x.k(), "state: blocks must share length k");
}

}  // namespace

MoveScales MoveScales::uniform(std::size_t n_blocks, std::size_t n_fixed, double a) {
  return {std::vector<double>(n_blocks, a), std::vector<double>(n_blocks, a),
          std::vector<double>(n_fixed, a)};
}

void MoveScales::validate(std::size_t n_blocks, std::size_t n_fixed) const {
  require(block.size() == n_blocks && split.size() == n_blocks,
          "move scales: one block and split scale per variable block");
  require(fixed.size() == n_fixed, "move scales: one scale per fixed coordinate");
  const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  require(std::all_of(block.begin(), block.end(), positive) &&
              std::all_of(split.begin(), split.end(), positive) &&
              std::all_of(fixed.begin(), fixed.end(), positive),
          "move scales must be positive");
}

std::string_view move_name(MoveType type) {
  switch (type) {
    case MoveType::birth: return "birth";
    case MoveType::death: return "death";
    case MoveType::no_change: return "no_change";
  }
  return "unknown";
}

MoveDraw draw_move(MoveType type, const TransState& x, Rng& rng) {
  const std::size_t k = x.k();
  const std::size_t nb = x.blocks.size();
  MoveDraw d;
  d.type = type;
  if (type == MoveType::birth && k >= 1) d.j = rng.index(k);
  if (type == MoveType::death && k >= 2) d.j = rng.index(k - 1);
  d.eps.resize(nb);
  for (auto& e : d.eps) e = rng.half_normal();
  if (type == MoveType::birth) d.split_sign = draw_signs(nb, rng);
  d.eps_fixed = rng.half_normal();
  d.zeta.resize(nb);
  for (auto& z : d.zeta) z = draw_signs(k, rng);
  d.zeta_fixed = draw_signs(x.fixed.size(), rng);
  return d;
}

Proposal propose_birth(const TransState& x, const MoveDraw& draw, const MoveScales& scales,
                       std::size_t k_max) {
  check_draw(x, draw, scales);
  const std::size_t k = x.k();
  Proposal p;
  if (k == 0 || k >= k_max || draw.j >= k) {
    p.valid = false;
    p.x = x;
    return p;
  }
  const std::size_t nb = x.blocks.size();
  require(draw.eps.size() == nb && draw.split_sign.size() == nb, "birth: one eps and sign per block");
  p.x.fixed = x.fixed;
  p.x.blocks.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& src = x.blocks[b];
    auto& dst = p.x.blocks[b];
    dst.reserve(k + 1);
    const double u = draw.split_sign[b] * draw.eps[b];
    for (std::size_t i = 0; i < k; ++i) {
      if (i == draw.j) {
        dst.push_back(src[i] + scales.split[b] * u);
        dst.push_back(src[i] - scales.split[b] * u);
      } else {
        dst.push_back(src[i] + draw.zeta[b][i] * scales.block[b] * draw.eps[b]);
      }
    }
    p.log_jacobian += std::log(2.0 * scales.split[b]);
    // (sign, eps) has density 1/2 * 2 phi(eps) = phi(eps).
    p.log_aux_ratio -= log_std_normal(draw.eps[b]);
  }
  move_fixed(p.x.fixed, draw, scales);
  return p;
}

Proposal propose_death(const TransState& x, const MoveDraw& draw, const MoveScales& scales) {
  check_draw(x, draw, scales);
  const std::size_t k = x.k();
  Proposal p;
  if (k < 2 || draw.j + 1 >= k) {
    p.valid = false;
    p.x = x;
    return p;
  }
  const std::size_t nb = x.blocks.size();
  p.x.fixed = x.fixed;
  p.x.blocks.resize(nb);
  p.eps_star.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& src = x.blocks[b];
    auto& dst = p.x.blocks[b];
    dst.reserve(k - 1);
    const double u_star = (src[draw.j] - src[draw.j + 1]) / (2.0 * scales.split[b]);
    const double e = std::fabs(u_star);
    p.eps_star[b] = e;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == draw.j) {
        dst.push_back(0.5 * (src[i] + src[i + 1]));
      } else if (i == draw.j + 1) {
        continue;
      } else {
        dst.push_back(src[i] + draw.zeta[b][i] * scales.block[b] * e);
      }
    }
    p.log_jacobian -= std::log(2.0 * scales.split[b]);
    p.log_aux_ratio += log_std_normal(e);
  }
  move_fixed(p.x.fixed, draw, scales);
  return p;
}

Proposal propose_no_change(const TransState& x, const MoveDraw& draw, const MoveScales& scales) {
  check_draw(x, draw, scales);
  const std::size_t nb = x.blocks.size();
  require(draw.eps.size() == nb, "no-change: one eps per block");
  Proposal p;
  p.x = x;
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t i = 0; i < x.k(); ++i)
      p.x.blocks[b][i] += draw.zeta[b][i] * scales.block[b] * draw.eps[b];
  move_fixed(p.x.fixed, draw, scales);
  return p;
}

double acceptance_log_prob(MoveType type, const ChainState& old_state,
                           const ChainState& new_state, double log_jacobian,
                           const MoveWeights& weights, double log_aux_ratio,
                           double log_zeta_ratio) {
  if (!std::isfinite(new_state.log_post)) return kNegInf;
  double log_w = 0.0;
  if (type == MoveType::birth) log_w = std::log(weights.death / weights.birth);
  if (type == MoveType::death) log_w = std::log(weights.birth / weights.death);
  const double a = new_state.log_post - old_state.log_post + log_jacobian + log_aux_ratio + log_w +
                   log_zeta_ratio;
  return std::min(0.0, a);
}

void AcceptanceCounts::record(const StepResult& r) {
  const auto i = static_cast<std::size_t>(r.type);
  ++proposed[i];
  if (r.accepted) ++accepted[i];
}

double AcceptanceCounts::rate(MoveType type) const {
  const auto i = static_cast<std::size_t>(type);
  return proposed[i] == 0 ? 0.0
                          : static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]);
}

Sampler::Sampler(LogTarget target, MoveScales scales, MoveWeights weights, std::size_t k_max)
    : target_(std::move(target)), scales_(std::move(scales)), weights_(weights), k_max_(k_max) {
  require(weights_.birth > 0.0 && weights_.death > 0.0 && weights_.no_change >= 0.0,
          "move weights: birth and death weights must be positive");
  require(k_max_ >= 1, "k_max must be >= 1");
}

StepResult Sampler::step(ChainState& state, Rng& rng) const {
  const double total = weights_.birth + weights_.death + weights_.no_change;
  const double u = rng.uniform() * total;
  MoveType type = MoveType::no_change;
  if (u < weights_.birth) type = MoveType::birth;
  else if (u < weights_.birth + weights_.death) type = MoveType::death;

  const MoveDraw draw = draw_move(type, state.x, rng);
  Proposal p;
  switch (type) {
    case MoveType::birth: p = propose_birth(state.x, draw, scales_, k_max_); break;
    case MoveType::death: p = propose_death(state.x, draw, scales_); break;
    case MoveType::no_change: p = propose_no_change(state.x, draw, scales_); break;
  }
  // The acceptance uniform is always consumed so the stream position does not
  // depend on whether the proposal was valid.
  const double log_u = std::log(rng.uniform_open());
  StepResult result{type, false};
  if (!p.valid) return result;

  const double lp = target_(p.x);
  ChainState proposed{std::move(p.x), lp};
  const double log_a =
      acceptance_log_prob(type, state, proposed, p.log_jacobian, weights_, p.log_aux_ratio);
  if (log_u < log_a) {
    state = std::move(proposed);
    result.accepted = true;
  }
  return result;
}

}  // namespace kcoddp::ttmcmc
