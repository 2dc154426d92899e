#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "kcoddp/rng.hpp"

namespace kcoddp::ttmcmc {

/// A state in transformed (unconstrained) coordinates. `blocks` are the
/// variable-dimension blocks, all of the same length k; `fixed` is the
/// fixed-dimension block.
struct TransState {
  std::vector<std::vector<double>> blocks;
  std::vector<double> fixed;

  std::size_t k() const { return blocks.empty() ? 0 : blocks.front().size(); }
};

struct ChainState {
  TransState x;
  double log_post = 0.0;
};

/// Additive scales. `block[b]` moves coordinates of variable block b,
/// `split[b]` is the split/merge scale of block b, and `fixed[i]` is the scale
/// of fixed coordinate i.
struct MoveScales {
  std::vector<double> block;
  std::vector<double> split;
  std::vector<double> fixed;

  /// Split scales equal to the block scales.
  static MoveScales uniform(std::size_t n_blocks, std::size_t n_fixed, double a);
  void validate(std::size_t n_blocks, std::size_t n_fixed) const;
};

struct MoveWeights {
  double birth = 1.0 / 3.0;
  double death = 1.0 / 3.0;
  double no_change = 1.0 / 3.0;
};

enum class MoveType { birth = 0, death = 1, no_change = 2 };

std::string_view move_name(MoveType type);

/// Random inputs of one move. For birth, j is the atom that splits; for death,
/// the pair (j, j+1) merges. `eps` holds one positive draw per variable block,
/// `split_sign` the orientation of each birth split, and `zeta` the +-1 signs
/// per variable coordinate (entries at the split/merge positions are unused).
struct MoveDraw {
  MoveType type = MoveType::no_change;
  std::size_t j = 0;
  std::vector<double> eps;
  std::vector<int> split_sign;
  double eps_fixed = 0.0;
  std::vector<std::vector<int>> zeta;
  std::vector<int> zeta_fixed;
};

/// Draws move inputs for `type` at the current state. Returns a draw with
/// j = 0 even when the move is impossible (death at k = 1); the proposal then
/// reports invalid.
MoveDraw draw_move(MoveType type, const TransState& x, Rng& rng);

struct Proposal {
  TransState x;
  double log_jacobian = 0.0;
  /// log of (reverse auxiliary density / forward auxiliary density).
  double log_aux_ratio = 0.0;
  /// Death only: recovered |u*| per block.
  std::vector<double> eps_star;
  bool valid = true;
};

/// Splits atom j of every block into (x + s b eps, x - s b eps) at positions
/// j, j+1; moves the others by zeta a eps.
Proposal propose_birth(const TransState& x, const MoveDraw& draw, const MoveScales& scales,
                       std::size_t k_max = static_cast<std::size_t>(-1));

/// Merges the pair (j, j+1) of every block into its average; moves the others
/// by zeta a |u*| with u* = (x_j - x_{j+1}) / (2 b).
Proposal propose_death(const TransState& x, const MoveDraw& draw, const MoveScales& scales);

/// Additive move of every coordinate by zeta a eps with block-shared eps.
Proposal propose_no_change(const TransState& x, const MoveDraw& draw, const MoveScales& scales);

/// min(0, new - old + log_jacobian + log_aux_ratio + log(w_reverse/w_forward) + log_zeta_ratio).
double acceptance_log_prob(MoveType type, const ChainState& old_state,
                           const ChainState& new_state, double log_jacobian,
                           const MoveWeights& weights, double log_aux_ratio = 0.0,
                           double log_zeta_ratio = 0.0);

using LogTarget = std::function<double(const TransState&)>;

struct StepResult {
  MoveType type = MoveType::no_change;
  bool accepted = false;
};

/// Per-move-type proposal and acceptance counts.
struct AcceptanceCounts {
  std::array<std::size_t, 3> proposed{};
  std::array<std::size_t, 3> accepted{};

  void record(const StepResult& r);
  double rate(MoveType type) const;
};

class Sampler {
 public:
  Sampler(LogTarget target, MoveScales scales, MoveWeights weights, std::size_t k_max);

  /// One Metropolis-Hastings transition; `state` is updated in place.
  StepResult step(ChainState& state, Rng& rng) const;

  const MoveScales& scales() const { return scales_; }
  const MoveWeights& weights() const { return weights_; }

 private:
  LogTarget target_;
  MoveScales scales_;
  MoveWeights weights_;
  std::size_t k_max_;
};

}  // namespace kcoddp::ttmcmc
