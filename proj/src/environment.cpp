#include "ste/environment.hpp"

#include <cmath>
#include <cstring>

#include "ste/errors.hpp"
#include "ste/plume.hpp"

namespace ste {

GridPos apply_action(GridPos pos, Action a) {
  switch (a) {
    case Action::right: return {pos.x + 1, pos.y};
    case Action::left: return {pos.x - 1, pos.y};
    case Action::down: return {pos.x, pos.y - 1};
    case Action::up: return {pos.x, pos.y + 1};
    case Action::stay: return pos;
  }
  return pos;
}

const char* to_string(Action a) {
  switch (a) {
    case Action::right: return "right";
    case Action::left: return "left";
    case Action::down: return "down";
    case Action::up: return "up";
    case Action::stay: return "stay";
  }
  return "?";
}

Action action_from_string(const std::string& name) {
  for (Action a : kAllActions)
    if (name == to_string(a)) return a;
  throw ConfigError("unknown action name: " + name);
}

Environment::Environment(EnvParams params)
    : params_(std::move(params)), cache_(params_) {
  if (params_.h_max > 15)
    throw ConfigError("h_max above 15 is not supported by the successor expansion");
}

bool Environment::is_feasible(GridPos pos, Action a) const {
  return params_.contains(apply_action(pos, a));
}

std::vector<Action> Environment::feasible_actions(GridPos pos) const {
  std::vector<Action> out;
  out.reserve(5);
  for (Action a : kAllActions)
    if (is_feasible(pos, a)) out.push_back(a);
  return out;
}

Environment::ResetResult Environment::reset(const Scenario& scenario, Rng& rng,
                                            int horizon) const {
  const GridPos pos = start_pos();
  const int truth = hypothesis_index(params_, scenario.truth);
  const int h0 = sample_hits(cache_.mean_hits_at(pos, truth), params_.h_max, rng);
  auto update = bayes_update(Belief::uniform(params_), pos, h0, cache_);
  return ResetResult{BeliefState{pos, std::move(update.posterior), 0, horizon}, h0};
}

Environment::StepResult Environment::step(const BeliefState& state, Action a,
                                          const Scenario& scenario, Rng& rng) const {
  if (state.step >= state.horizon)
    throw EpisodeOver("episode is over: step " + std::to_string(state.step));
  if (!is_feasible(state.pos, a))
    throw ContractViolation(std::string("infeasible action ") + to_string(a));
  const GridPos pos = apply_action(state.pos, a);
  const int truth = hypothesis_index(params_, scenario.truth);
  const int h = sample_hits(cache_.mean_hits_at(pos, truth), params_.h_max, rng);
  auto update = bayes_update(state.belief, pos, h, cache_);
  BeliefState next{pos, std::move(update.posterior), state.step + 1, state.horizon};
  const double reward = -entropy(next.belief);
  return StepResult{std::move(next), h, reward};
}

std::vector<Environment::Successor> Environment::successor_distribution(
    const BeliefState& state, Action a) const {
  if (!is_feasible(state.pos, a))
    throw ContractViolation(std::string("infeasible action ") + to_string(a));
  SuccessorEval eval(*this);
  eval.set_state(state);
  const auto stats = eval.eval(a);
  std::vector<Successor> out;
  out.reserve(static_cast<size_t>(params_.h_max) + 1);
  for (int h = 0; h <= params_.h_max; ++h) {
    Belief post = state.belief;  // placeholder for the zero-probability branch
    if (stats.probability[static_cast<size_t>(h)] > 0.0) {
      std::vector<double> q(static_cast<size_t>(params_.n_hypotheses()));
      eval.posterior(stats.next_pos, h, q);
      post = Belief(params_.nx, params_.ny, params_.n_fluxes(), std::move(q));
    }
    out.push_back(Successor{stats.probability[static_cast<size_t>(h)], h,
                            BeliefState{stats.next_pos, std::move(post),
                                        state.step + 1, state.horizon}});
  }
  return out;
}

int egocentric_size(const EnvParams& params) {
  return (2 * params.nx - 1) * (2 * params.ny - 1) * params.n_fluxes();
}

void egocentric_scatter(std::span<const double> probs, int nx, int ny, int n_phi,
                        GridPos pos, std::span<double> out, int out_channels) {
  const int ex_n = 2 * nx - 1;
  const int x_off = nx - 1 - pos.x;
  const int y_off = ny - 1 - pos.y;
  for (int f = 0; f < n_phi; ++f) {
    const double* plane = probs.data() + static_cast<size_t>(f) * ny * nx;
    for (int ys = 0; ys < ny; ++ys) {
      double* row = out.data() +
                    (static_cast<size_t>(ys + y_off) * ex_n + x_off) * out_channels + f;
      for (int xs = 0; xs < nx; ++xs)
        row[static_cast<size_t>(xs) * out_channels] = plane[ys * nx + xs];
    }
  }
}

void egocentric_tensor(const Belief& belief, GridPos pos, std::span<double> out) {
  std::memset(out.data(), 0, out.size() * sizeof(double));
  egocentric_scatter(belief.probs(), belief.nx(), belief.ny(), belief.n_fluxes(), pos,
                     out, belief.n_fluxes());
}

std::vector<double> egocentric_tensor(const BeliefState& state) {
  const int nx = state.belief.nx(), ny = state.belief.ny();
  std::vector<double> out(static_cast<size_t>(2 * nx - 1) * (2 * ny - 1) *
                          state.belief.n_fluxes());
  egocentric_tensor(state.belief, state.pos, out);
  return out;
}

SuccessorEval::SuccessorEval(const Environment& env) : env_(&env) {
  log_p_.resize(static_cast<size_t>(env.params().n_hypotheses()));
}

void SuccessorEval::set_state(const BeliefState& state) {
  state_ = &state;
  const auto p = state.belief.probs();
  for (size_t i = 0; i < p.size(); ++i)
    log_p_[i] = p[i] > 0.0 ? std::log(p[i]) : 0.0;  // zero-mass terms drop out
}

SuccessorEval::ActionStats SuccessorEval::eval(Action a) const {
  const auto& params = env_->params();
  const int h_max = params.h_max;
  ActionStats stats;
  stats.next_pos = apply_action(state_->pos, a);
  if (!params.contains(stats.next_pos))
    throw ContractViolation(std::string("infeasible action ") + to_string(a));
  const auto p = state_->belief.probs();
  for (int h = 0; h <= h_max; ++h) {
    const auto like = env_->cache().likelihood(stats.next_pos, h);
    const auto log_like = env_->cache().log_likelihood(stats.next_pos, h);
    double pred = 0.0, s = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
      const double w = p[i] * like[i];
      pred += w;
      if (w > 0.0) s += w * (log_p_[i] + log_like[i]);
    }
    stats.probability[static_cast<size_t>(h)] = pred;
    stats.entropy[static_cast<size_t>(h)] =
        pred > 0.0 ? std::log(pred) - s / pred : 0.0;
  }
  return stats;
}

void SuccessorEval::posterior(GridPos next_pos, int h, std::span<double> out) const {
  const auto like = env_->cache().likelihood(next_pos, h);
  const auto p = state_->belief.probs();
  double sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] * like[i];
    sum += out[i];
  }
  if (sum < 1e-300)
    throw UpdateError("zero-probability successor branch requested");
  const double inv = 1.0 / sum;
  for (size_t i = 0; i < p.size(); ++i) out[i] *= inv;
}

}  // namespace ste
