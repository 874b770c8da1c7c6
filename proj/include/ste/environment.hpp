#ifndef STE_ENVIRONMENT_HPP
#define STE_ENVIRONMENT_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ste/belief.hpp"
#include "ste/env_params.hpp"
#include "ste/likelihood.hpp"
#include "ste/rng.hpp"

namespace ste {

// Five grid actions. down is negative y, which is the downwind direction.
enum class Action : int { right = 0, left = 1, down = 2, up = 3, stay = 4 };

constexpr std::array<Action, 5> kAllActions = {Action::right, Action::left,
                                               Action::down, Action::up, Action::stay};

GridPos apply_action(GridPos pos, Action a);
const char* to_string(Action a);
Action action_from_string(const std::string& name);

// Belief-MDP state: agent position, belief, and actions taken so far.
struct BeliefState {
  GridPos pos;
  Belief belief;
  int step = 0;
  int horizon = 20;
};

// One ground-truth episode configuration.
struct Scenario {
  SourceTerm truth;
  std::uint64_t seed = 0;
};

// The belief-MDP. Owns the environment constants and the likelihood cache;
// all methods are pure transition functions, safe for parallel episodes.
class Environment {
 public:
  explicit Environment(EnvParams params);

  const EnvParams& params() const { return params_; }
  const LikelihoodCache& cache() const { return cache_; }

  GridPos start_pos() const { return {params_.nx / 2, params_.ny / 2}; }

  // Feasible actions exclude moves that would exit the grid; stay is always
  // included. Order follows kAllActions.
  std::vector<Action> feasible_actions(GridPos pos) const;
  bool is_feasible(GridPos pos, Action a) const;

  struct ResetResult {
    BeliefState state;
    int initial_hits;
  };
  // Agent at the grid center, uniform prior updated once with an observation
  // sampled at the start position (which may be zero hits), step = 0.
  ResetResult reset(const Scenario& scenario, Rng& rng, int horizon = 20) const;

  struct StepResult {
    BeliefState next;
    int hits;
    double reward;  // -entropy(next.belief)
  };
  // Throws ContractViolation for an infeasible action, EpisodeOver past the
  // horizon.
  StepResult step(const BeliefState& state, Action a, const Scenario& scenario,
                  Rng& rng) const;

  struct Successor {
    double probability;  // agent's predictive Pr(h)
    int hits;
    BeliefState state;
  };
  // One successor per hit count; probabilities sum to 1. A successor with
  // vanishing predictive probability keeps the prior belief (its weight is
  // zero in every expectation).
  std::vector<Successor> successor_distribution(const BeliefState& state,
                                                Action a) const;

 private:
  EnvParams params_;
  LikelihoodCache cache_;
};

// Belief re-indexed into source-minus-agent coordinates on a
// (2nx-1) x (2ny-1) x n_phi grid, zero outside the physical domain. Entry
// (xs - x + nx - 1, ys - y + ny - 1, f) equals belief(xs, ys, f); layout is
// height-major with the flux channel fastest, (ey * (2nx-1) + ex) * n_phi + f.
// Total mass is preserved.
std::vector<double> egocentric_tensor(const BeliefState& state);
void egocentric_tensor(const Belief& belief, GridPos pos, std::span<double> out);
int egocentric_size(const EnvParams& params);

// Scatter a raw probability tensor into channels [0, n_phi) of an egocentric
// output with out_channels per pixel (extra channels are left untouched).
void egocentric_scatter(std::span<const double> probs, int nx, int ny, int n_phi,
                        GridPos pos, std::span<double> out, int out_channels);

// Scratch-based successor expansion used in inner loops (infotaxis, Bellman
// backups). For one state it computes, per action and hit count, the
// predictive probability and the posterior entropy without materializing
// posterior tensors:
//   H(post_h) = ln P(h) - S_h / P(h),
//   P(h) = sum_i p_i L_h(i),  S_h = sum_i p_i L_h(i) (ln p_i + ln L_h(i)).
class SuccessorEval {
 public:
  explicit SuccessorEval(const Environment& env);

  // Caches ln p_i for the state's belief; call once per state.
  void set_state(const BeliefState& state);

  struct ActionStats {
    GridPos next_pos;
    std::array<double, 16> probability;  // indexed by h, first h_max+1 used
    std::array<double, 16> entropy;
  };
  ActionStats eval(Action a) const;  // requires a feasible action

  // Posterior for one (action, h) branch of the current state.
  void posterior(GridPos next_pos, int h, std::span<double> out) const;

  const BeliefState& state() const { return *state_; }
  int h_max() const { return env_->params().h_max; }

 private:
  const Environment* env_;
  const BeliefState* state_ = nullptr;
  std::vector<double> log_p_;  // ln p_i, 0 where p_i = 0
};

}  // namespace ste

#endif
