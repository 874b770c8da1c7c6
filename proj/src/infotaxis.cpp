#include "ste/infotaxis.hpp"

#include <limits>

namespace ste {

namespace {

double expected_entropy_from_stats(const SuccessorEval::ActionStats& stats, int h_max) {
  double e = 0.0;
  for (int h = 0; h <= h_max; ++h)
    e += stats.probability[static_cast<size_t>(h)] * stats.entropy[static_cast<size_t>(h)];
  return e;
}

}  // namespace

double expected_entropy(const BeliefState& state, Action a, const Environment& env) {
  SuccessorEval eval(env);
  eval.set_state(state);
  return expected_entropy_from_stats(eval.eval(a), env.params().h_max);
}

double expected_information_gain(const BeliefState& state, Action a,
                                 const Environment& env) {
  return entropy(state.belief) - expected_entropy(state, a, env);
}

std::vector<Action> infotaxis_tied_set(const BeliefState& state, const Environment& env) {
  SuccessorEval eval(env);
  eval.set_state(state);
  const int h_max = env.params().h_max;

  double values[5];
  Action actions[5];
  int n = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Action a : kAllActions) {
    if (!env.is_feasible(state.pos, a)) continue;
    const double v = expected_entropy_from_stats(eval.eval(a), h_max);
    values[n] = v;
    actions[n] = a;
    ++n;
    if (v < best) best = v;
  }
  std::vector<Action> tied;
  for (int i = 0; i < n; ++i)
    if (values[i] <= best + kActionTieTolerance) tied.push_back(actions[i]);
  return tied;
}

Action infotaxis_action(const BeliefState& state, const Environment& env, Rng& rng) {
  const auto tied = infotaxis_tied_set(state, env);
  return tied[static_cast<size_t>(rng.uniform_int(static_cast<int>(tied.size())))];
}

}  // namespace ste
