#include "ste/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ste/drl.hpp"
#include "ste/errors.hpp"
#include "ste/infotaxis.hpp"

namespace ste {

PolicyFactory infotaxis_policy() {
  return [](const Environment& env) -> Policy {
    return [&env](const BeliefState& state, Rng& rng) {
      return infotaxis_action(state, env, rng);
    };
  };
}

PolicyFactory random_policy() {
  return [](const Environment& env) -> Policy {
    return [&env](const BeliefState& state, Rng& rng) {
      const auto feasible = env.feasible_actions(state.pos);
      return feasible[static_cast<size_t>(
          rng.uniform_int(static_cast<int>(feasible.size())))];
    };
  };
}

PolicyFactory drl_policy(std::shared_ptr<const Network> net, bool time_channel) {
  return [net, time_channel](const Environment& env) -> Policy {
    auto actor = std::make_shared<DrlActor>(env, net, time_channel);
    return [actor](const BeliefState& state, Rng& rng) {
      return actor->act(state, rng);
    };
  };
}

EpisodeResult run_episode(const Environment& env, const Policy& policy,
                          const Scenario& scenario, int horizon, Rng& rng,
                          bool count_initial_entropy,
                          std::vector<TrajectoryPoint>* trajectory) {
  const EnvParams& p = env.params();
  const int truth_index = hypothesis_index(p, scenario.truth);

  EpisodeResult r;
  r.truth = scenario.truth;

  auto reset = env.reset(scenario, rng, horizon);
  BeliefState state = std::move(reset.state);
  r.initial_entropy = entropy(state.belief);
  r.total_hits = reset.initial_hits;
  r.cumulative_entropy = count_initial_entropy ? r.initial_entropy : 0.0;
  if (trajectory) {
    trajectory->clear();
    trajectory->push_back({0, state.pos, Action::stay, false, reset.initial_hits,
                           r.initial_entropy, 0.0});
  }

  while (state.step < horizon) {
    const Action a = policy(state, rng);
    // A policy that breaks the feasibility contract fails the episode rather
    // than the whole evaluation; the record keeps whatever was learned so far.
    if (!env.is_feasible(state.pos, a)) {
      r.aborted = true;
      break;
    }
    auto s = env.step(state, a, scenario, rng);
    state = std::move(s.next);
    const double h = entropy(state.belief);
    r.cumulative_entropy += h;
    r.total_hits += s.hits;
    if (trajectory)
      trajectory->push_back({state.step, state.pos, a, true, s.hits, h, s.reward});
  }

  r.final_entropy = entropy(state.belief);
  r.truth_probability = state.belief[truth_index];
  r.success = !r.aborted && r.truth_probability >= 0.5;
  r.map = map_estimate(state.belief, p);

  const auto mx = marginal(state.belief, Axis::xs);
  const auto my = marginal(state.belief, Axis::ys);
  const auto mf = marginal(state.belief, Axis::phi);
  const std::vector<double> ux(static_cast<size_t>(p.nx), 1.0 / p.nx);
  const std::vector<double> uy(static_cast<size_t>(p.ny), 1.0 / p.ny);
  const std::vector<double> uf(static_cast<size_t>(p.n_fluxes()), 1.0 / p.n_fluxes());
  const int fi = flux_index_of(p, scenario.truth.phi);
  r.rel_drps_x = drps(mx, scenario.truth.xs) / drps(ux, scenario.truth.xs);
  r.rel_drps_y = drps(my, scenario.truth.ys) / drps(uy, scenario.truth.ys);
  r.rel_drps_phi = drps(mf, fi) / drps(uf, fi);
  return r;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + (values[lo + 1] - values[lo]) * frac;
}

EvalResult evaluate(const Environment& env, const PolicyFactory& make_policy,
                    const EvalConfig& cfg) {
  if (cfg.episodes < 1) throw ConfigError("evaluation needs at least one episode");
  if (cfg.horizon < 1) throw ConfigError("evaluation horizon must be positive");
  const EnvParams& p = env.params();
  if (cfg.mixture == Mixture::per_flux && cfg.episodes % p.n_fluxes() != 0)
    throw ConfigError("per-flux evaluation needs episodes divisible by the flux count");
  const long stratum = cfg.mixture == Mixture::per_flux
                           ? cfg.episodes / p.n_fluxes()
                           : cfg.episodes;

  EvalResult out;
  out.episodes.resize(static_cast<size_t>(cfg.episodes));

  const int threads = std::max(1, cfg.threads);
  auto worker = [&](int t) {
    Policy policy = make_policy(env);
    for (long e = t; e < cfg.episodes; e += threads) {
      Rng rng = episode_rng(cfg.seed, static_cast<std::uint64_t>(e));
      Scenario sc;
      if (cfg.mixture == Mixture::per_flux) {
        const int fi = static_cast<int>(e / stratum);
        sc.truth = hypothesis_from_index(
            p, fi * p.n_cells() + rng.uniform_int(p.n_cells()));
      } else {
        sc.truth = hypothesis_from_index(p, rng.uniform_int(p.n_hypotheses()));
      }
      sc.seed = splitmix64(cfg.seed ^ static_cast<std::uint64_t>(e));
      out.episodes[static_cast<size_t>(e)] =
          run_episode(env, policy, sc, cfg.horizon, rng, cfg.count_initial_entropy);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (std::thread& th : pool) th.join();
  }

  PolicyMetrics& m = out.metrics;
  m.episodes = cfg.episodes;
  m.success_by_flux.assign(static_cast<size_t>(p.n_fluxes()), 0.0);
  m.episodes_by_flux.assign(static_cast<size_t>(p.n_fluxes()), 0);
  m.success_by_cell.assign(static_cast<size_t>(p.n_cells()), 0.0);
  m.episodes_by_cell.assign(static_cast<size_t>(p.n_cells()), 0);

  std::vector<double> rx, ry, rf;
  rx.reserve(out.episodes.size());
  ry.reserve(out.episodes.size());
  rf.reserve(out.episodes.size());
  for (const EpisodeResult& r : out.episodes) {
    m.success_rate += r.success ? 1.0 : 0.0;
    m.mean_cumulative_entropy += r.cumulative_entropy;
    m.mean_final_entropy += r.final_entropy;
    m.mean_truth_probability += r.truth_probability;
    const int fi = flux_index_of(p, r.truth.phi);
    const int cell = r.truth.ys * p.nx + r.truth.xs;
    m.episodes_by_flux[static_cast<size_t>(fi)] += 1;
    m.success_by_flux[static_cast<size_t>(fi)] += r.success ? 1.0 : 0.0;
    m.episodes_by_cell[static_cast<size_t>(cell)] += 1;
    m.success_by_cell[static_cast<size_t>(cell)] += r.success ? 1.0 : 0.0;
    rx.push_back(r.rel_drps_x);
    ry.push_back(r.rel_drps_y);
    rf.push_back(r.rel_drps_phi);
  }
  const double n = static_cast<double>(cfg.episodes);
  m.success_rate /= n;
  m.mean_cumulative_entropy /= n;
  m.mean_final_entropy /= n;
  m.mean_truth_probability /= n;
  for (size_t i = 0; i < m.success_by_flux.size(); ++i)
    if (m.episodes_by_flux[i] > 0)
      m.success_by_flux[i] /= static_cast<double>(m.episodes_by_flux[i]);
  for (size_t i = 0; i < m.success_by_cell.size(); ++i)
    if (m.episodes_by_cell[i] > 0)
      m.success_by_cell[i] /= static_cast<double>(m.episodes_by_cell[i]);

  m.rel_drps_x = {percentile(rx, 0.5), percentile(rx, 0.75)};
  m.rel_drps_y = {percentile(ry, 0.5), percentile(ry, 0.75)};
  m.rel_drps_phi = {percentile(rf, 0.5), percentile(rf, 0.75)};
  return out;
}

}  // namespace ste
