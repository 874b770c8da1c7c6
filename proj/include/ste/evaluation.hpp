#ifndef STE_EVALUATION_HPP
#define STE_EVALUATION_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "ste/belief.hpp"
#include "ste/environment.hpp"
#include "ste/value_net.hpp"

namespace ste {

// A policy maps a belief state to an action, drawing any tie-break or
// exploration randomness from the episode stream. Policies are created per
// worker thread through a factory so each instance can own scratch buffers.
using Policy = std::function<Action(const BeliefState&, Rng&)>;
using PolicyFactory = std::function<Policy(const Environment&)>;

PolicyFactory infotaxis_policy();
PolicyFactory drl_policy(std::shared_ptr<const Network> net, bool time_channel = false);
// Uniform draw over the feasible actions; the do-nothing baseline.
PolicyFactory random_policy();

struct TrajectoryPoint {
  int step = 0;  // 0 is the reset observation; action/reward are blank there
  GridPos pos;
  Action action = Action::stay;
  bool has_action = false;
  int hits = 0;
  double entropy = 0.0;
  double reward = 0.0;
};

struct EpisodeResult {
  SourceTerm truth;
  bool success = false;           // Pr(truth) >= 0.5 at the end
  bool aborted = false;           // policy broke the action contract mid-run
  double truth_probability = 0.0; // final posterior mass on the truth
  double cumulative_entropy = 0.0;
  double initial_entropy = 0.0;   // after the reset observation
  double final_entropy = 0.0;
  double rel_drps_x = 0.0;        // final / uniform-prior score per axis
  double rel_drps_y = 0.0;
  double rel_drps_phi = 0.0;
  int total_hits = 0;
  MapEstimate map;
};

// Runs one full episode. The rng must be the episode's own stream; every
// draw (reset observation, policy tie-breaks, hit sampling) comes from it.
// cumulative_entropy sums the post-action entropies, plus the initial one
// when count_initial_entropy is set.
EpisodeResult run_episode(const Environment& env, const Policy& policy,
                          const Scenario& scenario, int horizon, Rng& rng,
                          bool count_initial_entropy = false,
                          std::vector<TrajectoryPoint>* trajectory = nullptr);

// uniform draws every truth with equal weight; per_flux splits the episode
// budget into equal blocks per flux value (source cell still uniform), which
// is the natural mixture for per-flux success tables.
enum class Mixture { uniform, per_flux };

struct EvalConfig {
  long episodes = 5000;  // total, across all strata
  int horizon = 20;
  std::uint64_t seed = 1;
  int threads = 1;
  bool count_initial_entropy = false;
  Mixture mixture = Mixture::uniform;
};

struct Percentiles {
  double median = 0.0;
  double p75 = 0.0;
};

struct PolicyMetrics {
  long episodes = 0;
  double success_rate = 0.0;
  double mean_cumulative_entropy = 0.0;
  double mean_final_entropy = 0.0;
  double mean_truth_probability = 0.0;
  Percentiles rel_drps_x, rel_drps_y, rel_drps_phi;
  std::vector<double> success_by_flux;   // indexed by flux index
  std::vector<long> episodes_by_flux;
  std::vector<double> success_by_cell;   // indexed ys * nx + xs
  std::vector<long> episodes_by_cell;
};

struct EvalResult {
  PolicyMetrics metrics;
  std::vector<EpisodeResult> episodes;
};

// Evaluates a policy over episodes with uniformly drawn source terms.
// Episode e uses the stream episode_rng(seed, e); results are reduced in
// episode order, so the thread count never changes any number.
EvalResult evaluate(const Environment& env, const PolicyFactory& make_policy,
                    const EvalConfig& cfg);

// Linear-interpolation percentile, q in [0, 1]. Copies and sorts.
double percentile(std::vector<double> values, double q);

}  // namespace ste

#endif
