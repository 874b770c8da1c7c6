#ifndef STE_TRAINING_HPP
#define STE_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ste/environment.hpp"
#include "ste/value_net.hpp"

namespace ste {

// Model-based value iteration with a replay buffer and a target network.
// The network learns v(s) ~ min_a sum_h Pr(h|s,a) [H(s'_h) + v_target(s'_h)];
// acting is epsilon-greedy over the same one-step lookahead under the online
// network. Everything is driven by per-episode rng streams, so a run is a
// pure function of (environment, config) and can be resumed mid-way.
struct TrainConfig {
  ArchKind arch = ArchKind::fc;
  long episodes = 20000;
  int horizon = 20;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double momentum = 0.0;
  // Exploration decays linearly from start to end over the first
  // decay_fraction of episodes, then stays flat.
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;
  int replay_capacity = 10000;
  long target_sync_interval = 1000;  // gradient steps between target syncs
  int update_every = 1;              // environment steps per gradient step
  bool time_channel = false;
  std::uint64_t seed = 1;
  // Periodic checkpointing; 0 or an empty dir disables it.
  long checkpoint_every = 0;  // episodes
  std::string checkpoint_dir;

  void validate() const;  // throws ConfigError
};

double epsilon_at(const TrainConfig& cfg, long episode);

struct TrainEpisodeRow {
  long episode = 0;
  double loss = 0.0;  // mean Bellman residual over this episode's updates
  double cumulative_entropy = 0.0;
  double epsilon = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<TrainEpisodeRow> history;  // episodes run by this call
  long gradient_steps = 0;
  long episodes = 0;  // completed overall, including any resumed prefix
};

// Uniform-replacement replay over the most recent states. Storage order and
// the overwrite cursor are part of the serialized training state, so resumed
// runs sample identically.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void push(const BeliefState& state);
  const BeliefState& sample(Rng& rng) const;

  int size() const { return static_cast<int>(items_.size()); }
  int capacity() const { return capacity_; }
  int head() const { return head_; }
  const BeliefState& at(int i) const { return items_[static_cast<size_t>(i)]; }
  void restore(std::vector<BeliefState> items, int head);

 private:
  std::vector<BeliefState> items_;
  int capacity_;
  int head_ = 0;  // next slot to overwrite once full
};

class Trainer {
 public:
  Trainer(const Environment& env, TrainConfig cfg);

  using EpisodeCallback = std::function<void(const TrainEpisodeRow&)>;

  // Runs episodes [episode_index, cfg.episodes). Throws TrainingDiverged on a
  // non-finite loss or weight. Writes periodic checkpoints plus a resumable
  // state file when configured.
  TrainResult run(const EpisodeCallback& on_episode = nullptr);

  // Full training state (networks, optimizer velocity, replay, counters) in a
  // binary CBOR file; loading it continues bit-for-bit as if the run had
  // never stopped. The config must match the saved one in every field that
  // affects the trajectory of the run.
  void save_state(const std::string& path) const;
  static Trainer load_state(const Environment& env, TrainConfig cfg,
                            const std::string& path);

  const Network& network() const { return *net_; }
  const Network& target_network() const { return *target_; }
  const ReplayBuffer& replay() const { return replay_; }
  long episode_index() const { return episode_index_; }
  long gradient_steps() const { return gradient_steps_; }
  // Rows for every episode completed so far, across resumes.
  const std::vector<TrainEpisodeRow>& history() const { return full_history_; }

 private:
  double update(Rng& rng, class DrlActor& target_actor);
  void write_checkpoint(long episodes_done) const;

  const Environment* env_;
  TrainConfig cfg_;
  std::shared_ptr<Network> net_;
  std::shared_ptr<Network> target_;
  Network velocity_;
  ReplayBuffer replay_;
  std::vector<TrainEpisodeRow> full_history_;
  long episode_index_ = 0;
  long gradient_steps_ = 0;
  long env_steps_ = 0;

  // update() scratch
  NetWorkspace ws_;
  Network grads_;
  RowMat inputs_;
  Eigen::VectorXd targets_;
};

}  // namespace ste

#endif
