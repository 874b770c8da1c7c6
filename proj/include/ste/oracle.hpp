#ifndef STE_ORACLE_HPP
#define STE_ORACLE_HPP

#include <functional>

#include "ste/environment.hpp"

namespace ste {

// Exhaustive finite-horizon solvers for instances small enough to enumerate.
// They give ground truth for the learned value function and the greedy
// policies: V*(s) is the least achievable expected cumulative entropy
//   V*(s) = min_a sum_h Pr(h | s, a) [ H(s'_h) + V*(s'_h) ],  V*(terminal) = 0.
//
// The tree has up to (5 (h_max + 1))^(horizon - step) leaves; every call
// checks that bound against max_nodes first and throws OracleGuardError when
// the instance is out of reach.
double optimal_value(const Environment& env, const BeliefState& state,
                     double max_nodes = 1e6);

// The argmin action behind optimal_value; ties go to the smallest action
// index, matching the deterministic tie-break used elsewhere.
Action optimal_action(const Environment& env, const BeliefState& state,
                      double max_nodes = 1e6);

// Expected cumulative entropy of a fixed decision rule, by the same
// enumeration. The rule must be deterministic; resolve any tie inside it.
using DeterministicPolicy = std::function<Action(const BeliefState&)>;
double policy_value(const Environment& env, const BeliefState& state,
                    const DeterministicPolicy& policy, double max_nodes = 1e6);

}  // namespace ste

#endif
