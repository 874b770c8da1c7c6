#ifndef STE_INFOTAXIS_HPP
#define STE_INFOTAXIS_HPP

#include <vector>

#include "ste/environment.hpp"
#include "ste/rng.hpp"

namespace ste {

// Actions whose expected successor entropy is within this of the minimum are
// treated as tied and broken uniformly at random.
constexpr double kActionTieTolerance = 1e-12;

// Expected posterior entropy after taking a feasible action:
//   sum_h Pr(h | s, a) H(posterior_h).
double expected_entropy(const BeliefState& state, Action a, const Environment& env);

// G(s, a) = H(s) - expected_entropy(s, a); nonnegative up to rounding.
double expected_information_gain(const BeliefState& state, Action a,
                                 const Environment& env);

// Feasible actions within the tie tolerance of the minimum expected entropy,
// in kAllActions order.
std::vector<Action> infotaxis_tied_set(const BeliefState& state, const Environment& env);

// Greedy information-gain policy: arg min over feasible actions of the
// expected successor entropy, ties broken uniformly at random.
Action infotaxis_action(const BeliefState& state, const Environment& env, Rng& rng);

}  // namespace ste

#endif
