#include "ste/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "ste/belief.hpp"
#include "ste/errors.hpp"

namespace ste {

namespace {

void check_tractable(const Environment& env, const BeliefState& state,
                     double max_nodes) {
  const int depth = state.horizon - state.step;
  if (depth < 0) throw ContractViolation("oracle state is past its horizon");
  const double branch = 5.0 * (env.params().h_max + 1);
  const double leaves = std::pow(branch, depth);
  if (!(leaves <= max_nodes)) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "exhaustive search would expand about %.3g branches over %d "
                  "steps; the limit is %.3g",
                  leaves, depth, max_nodes);
    throw OracleGuardError(msg);
  }
}

double optimal_value_rec(const Environment& env, const BeliefState& state) {
  if (state.step >= state.horizon) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (Action a : env.feasible_actions(state.pos)) {
    double q = 0.0;
    for (const auto& succ : env.successor_distribution(state, a)) {
      if (succ.probability <= 0.0) continue;
      q += succ.probability *
           (entropy(succ.state.belief) + optimal_value_rec(env, succ.state));
    }
    best = std::min(best, q);
  }
  return best;
}

double policy_value_rec(const Environment& env, const BeliefState& state,
                        const DeterministicPolicy& policy) {
  if (state.step >= state.horizon) return 0.0;
  const Action a = policy(state);
  if (!env.is_feasible(state.pos, a))
    throw ContractViolation("oracle policy chose an infeasible action");
  double v = 0.0;
  for (const auto& succ : env.successor_distribution(state, a)) {
    if (succ.probability <= 0.0) continue;
    v += succ.probability *
         (entropy(succ.state.belief) + policy_value_rec(env, succ.state, policy));
  }
  return v;
}

}  // namespace

double optimal_value(const Environment& env, const BeliefState& state,
                     double max_nodes) {
  check_tractable(env, state, max_nodes);
  return optimal_value_rec(env, state);
}

Action optimal_action(const Environment& env, const BeliefState& state,
                      double max_nodes) {
  check_tractable(env, state, max_nodes);
  if (state.step >= state.horizon)
    throw ContractViolation("no action remains at the horizon");
  double best = std::numeric_limits<double>::infinity();
  Action pick = Action::right;
  for (Action a : env.feasible_actions(state.pos)) {
    double q = 0.0;
    for (const auto& succ : env.successor_distribution(state, a)) {
      if (succ.probability <= 0.0) continue;
      q += succ.probability *
           (entropy(succ.state.belief) + optimal_value_rec(env, succ.state));
    }
    if (q < best) {  // strict: feasible_actions runs in ascending index order
      best = q;
      pick = a;
    }
  }
  return pick;
}

double policy_value(const Environment& env, const BeliefState& state,
                    const DeterministicPolicy& policy, double max_nodes) {
  check_tractable(env, state, max_nodes);
  return policy_value_rec(env, state, policy);
}

}  // namespace ste
