#ifndef STE_DRL_HPP
#define STE_DRL_HPP

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "ste/environment.hpp"
#include "ste/rng.hpp"
#include "ste/value_net.hpp"

namespace ste {

// Width of the value-network input for one state.
int value_input_size(const EnvParams& params, bool time_channel);

// Egocentric belief tensor, optionally with a constant time-to-go channel
// (horizon - step) / horizon appended per pixel. out must have
// value_input_size entries.
void encode_state(const BeliefState& state, bool time_channel, std::span<double> out);

// Greedy actor over the one-step lookahead values
//   q(s, a) = sum_h Pr(h | s, a) [ H(s'_h) + v(s'_h) ],
// with v := 0 for terminal successors. With a zero-initialized network this
// reproduces infotaxis decisions exactly: the same sums, the same tie set,
// and the same single tie-break draw per action.
class DrlActor {
 public:
  DrlActor(const Environment& env, std::shared_ptr<const Network> net,
           bool time_channel = false);

  // q in kAllActions order; infeasible actions get +infinity.
  std::array<double, 5> action_values(const BeliefState& state);

  // Feasible actions within kActionTieTolerance of the minimum q.
  std::vector<Action> tied_set(const BeliefState& state);

  Action act(const BeliefState& state, Rng& rng);

  const Network& network() const { return *net_; }
  bool time_channel() const { return time_channel_; }

 private:
  const Environment* env_;
  std::shared_ptr<const Network> net_;
  bool time_channel_;
  SuccessorEval eval_;
  NetWorkspace ws_;
  RowMat inputs_;
  std::vector<double> post_;
};

}  // namespace ste

#endif
