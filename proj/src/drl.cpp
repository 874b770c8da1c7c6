#include "ste/drl.hpp"

#include <cstring>
#include <limits>

#include "ste/errors.hpp"
#include "ste/infotaxis.hpp"

namespace ste {

namespace {

void encode_probs(std::span<const double> probs, const EnvParams& params, GridPos pos,
                  int step, int horizon, bool time_channel, std::span<double> out) {
  const int nphi = params.n_fluxes();
  const int channels = nphi + (time_channel ? 1 : 0);
  std::memset(out.data(), 0, out.size() * sizeof(double));
  egocentric_scatter(probs, params.nx, params.ny, nphi, pos, out, channels);
  if (time_channel) {
    const double remaining =
        horizon > 0 ? static_cast<double>(horizon - step) / horizon : 0.0;
    const size_t pixels = static_cast<size_t>(2 * params.nx - 1) * (2 * params.ny - 1);
    for (size_t p = 0; p < pixels; ++p) out[p * channels + nphi] = remaining;
  }
}

}  // namespace

int value_input_size(const EnvParams& params, bool time_channel) {
  return input_geometry(params, time_channel).size();
}

void encode_state(const BeliefState& state, bool time_channel, std::span<double> out) {
  EnvParams geom;  // only the grid extents matter here
  geom.nx = state.belief.nx();
  geom.ny = state.belief.ny();
  geom.fluxes.assign(static_cast<size_t>(state.belief.n_fluxes()), 0.0);
  encode_probs(state.belief.probs(), geom, state.pos, state.step, state.horizon,
               time_channel, out);
}

DrlActor::DrlActor(const Environment& env, std::shared_ptr<const Network> net,
                   bool time_channel)
    : env_(&env), net_(std::move(net)), time_channel_(time_channel), eval_(env) {
  if (!net_) throw ContractViolation("drl actor needs a network");
  if (!(net_->input == input_geometry(env.params(), time_channel_)))
    throw ConfigError("network input geometry does not match the environment");
  const EnvParams& p = env.params();
  inputs_.resize(5 * (p.h_max + 1), net_->input.size());
  post_.resize(static_cast<size_t>(p.n_hypotheses()));
}

std::array<double, 5> DrlActor::action_values(const BeliefState& state) {
  const EnvParams& p = env_->params();
  eval_.set_state(state);

  SuccessorEval::ActionStats stats[5];
  bool feasible[5];
  for (Action a : kAllActions) {
    const int ai = static_cast<int>(a);
    feasible[ai] = env_->is_feasible(state.pos, a);
    if (feasible[ai]) stats[ai] = eval_.eval(a);
  }

  // Batch every successor that needs a value estimate into one forward pass.
  const bool terminal_successors = state.step + 1 >= state.horizon;
  int rows = 0;
  int row_of[5][16];
  if (!terminal_successors) {
    for (Action a : kAllActions) {
      const int ai = static_cast<int>(a);
      if (!feasible[ai]) continue;
      for (int h = 0; h <= p.h_max; ++h) {
        if (stats[ai].probability[static_cast<size_t>(h)] <= 0.0) {
          row_of[ai][h] = -1;
          continue;
        }
        eval_.posterior(stats[ai].next_pos, h, post_);
        encode_probs(post_, p, stats[ai].next_pos, state.step + 1, state.horizon,
                     time_channel_,
                     std::span<double>(inputs_.row(rows).data(),
                                       static_cast<size_t>(inputs_.cols())));
        row_of[ai][h] = rows++;
      }
    }
  }
  Eigen::VectorXd values;
  if (rows > 0) values = forward_batch(*net_, inputs_.topRows(rows), ws_);

  std::array<double, 5> q;
  q.fill(std::numeric_limits<double>::infinity());
  for (Action a : kAllActions) {
    const int ai = static_cast<int>(a);
    if (!feasible[ai]) continue;
    double acc = 0.0;
    for (int h = 0; h <= p.h_max; ++h) {
      const double v = terminal_successors || row_of[ai][h] < 0
                           ? 0.0
                           : values(row_of[ai][h]);
      acc += stats[ai].probability[static_cast<size_t>(h)] *
             (stats[ai].entropy[static_cast<size_t>(h)] + v);
    }
    q[static_cast<size_t>(ai)] = acc;
  }
  return q;
}

std::vector<Action> DrlActor::tied_set(const BeliefState& state) {
  const std::array<double, 5> q = action_values(state);
  double best = std::numeric_limits<double>::infinity();
  for (Action a : kAllActions)
    if (env_->is_feasible(state.pos, a))
      best = std::min(best, q[static_cast<size_t>(a)]);
  std::vector<Action> tied;
  for (Action a : kAllActions)
    if (env_->is_feasible(state.pos, a) &&
        q[static_cast<size_t>(a)] <= best + kActionTieTolerance)
      tied.push_back(a);
  return tied;
}

Action DrlActor::act(const BeliefState& state, Rng& rng) {
  const auto tied = tied_set(state);
  return tied[static_cast<size_t>(rng.uniform_int(static_cast<int>(tied.size())))];
}

}  // namespace ste
