#include "ste/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>

#include "net_json.hpp"
#include "ste/belief.hpp"
#include "ste/checkpoint.hpp"
#include "ste/drl.hpp"
#include "ste/errors.hpp"

namespace ste {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
  if (episodes < 1) throw ConfigError("training needs at least one episode");
  if (horizon < 1) throw ConfigError("training horizon must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning_rate must be positive and finite");
  if (!(momentum >= 0.0) || momentum >= 1.0)
    throw ConfigError("momentum must be in [0, 1)");
  for (double e : {epsilon_start, epsilon_end})
    if (!(e >= 0.0) || e > 1.0) throw ConfigError("epsilon must be in [0, 1]");
  if (!(epsilon_decay_fraction >= 0.0) || epsilon_decay_fraction > 1.0)
    throw ConfigError("epsilon_decay_fraction must be in [0, 1]");
  if (replay_capacity < batch_size)
    throw ConfigError("replay_capacity must be at least batch_size");
  if (target_sync_interval < 1)
    throw ConfigError("target_sync_interval must be positive");
  if (update_every < 1) throw ConfigError("update_every must be positive");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (checkpoint_every > 0 && checkpoint_dir.empty())
    throw ConfigError("checkpoint_every needs a checkpoint_dir");
}

double epsilon_at(const TrainConfig& cfg, long episode) {
  const double decay =
      cfg.epsilon_decay_fraction * static_cast<double>(cfg.episodes);
  if (decay <= 0.0) return cfg.epsilon_end;
  const double t = std::min(1.0, static_cast<double>(episode) / decay);
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * t;
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("replay capacity must be positive");
  items_.reserve(static_cast<size_t>(capacity));
}

void ReplayBuffer::push(const BeliefState& state) {
  if (size() < capacity_) {
    items_.push_back(state);
  } else {
    items_[static_cast<size_t>(head_)] = state;
    head_ = (head_ + 1) % capacity_;
  }
}

const BeliefState& ReplayBuffer::sample(Rng& rng) const {
  return items_[static_cast<size_t>(rng.uniform_int(size()))];
}

void ReplayBuffer::restore(std::vector<BeliefState> items, int head) {
  if (static_cast<int>(items.size()) > capacity_ || head < 0 ||
      (head != 0 && head >= capacity_)) {
    throw CheckpointError("replay state does not fit its declared capacity");
  }
  items_ = std::move(items);
  head_ = head;
}

namespace {

void zero_net(Network& net) {
  for (ConvLayer& c : net.conv) {
    std::fill(c.w.begin(), c.w.end(), 0.0);
    std::fill(c.b.begin(), c.b.end(), 0.0);
  }
  for (DenseLayer& d : net.dense) {
    std::fill(d.w.begin(), d.w.end(), 0.0);
    std::fill(d.b.begin(), d.b.end(), 0.0);
  }
}

// Weight init draws from a stream outside the episode index range.
constexpr std::uint64_t kInitStream = 0xffffffffffffffffull;

}  // namespace

Trainer::Trainer(const Environment& env, TrainConfig cfg)
    : env_(&env), cfg_(std::move(cfg)), replay_(std::max(1, cfg_.replay_capacity)) {
  cfg_.validate();
  const InputGeometry geo = input_geometry(env.params(), cfg_.time_channel);
  Rng init = episode_rng(cfg_.seed, kInitStream);
  net_ = std::make_shared<Network>(Network::make(cfg_.arch, geo, init));
  target_ = std::make_shared<Network>(*net_);
  velocity_ = zeros_like(*net_);
  grads_ = zeros_like(*net_);
  inputs_.resize(cfg_.batch_size, geo.size());
  targets_.resize(cfg_.batch_size);
}

double Trainer::update(Rng& rng, DrlActor& target_actor) {
  const int batch = cfg_.batch_size;
  for (int i = 0; i < batch; ++i) {
    const BeliefState& s = replay_.sample(rng);
    encode_state(s, cfg_.time_channel,
                 std::span<double>(inputs_.row(i).data(),
                                   static_cast<size_t>(inputs_.cols())));
    const auto q = target_actor.action_values(s);
    targets_(i) = *std::min_element(q.begin(), q.end());
  }
  zero_net(grads_);
  const double loss = loss_and_gradient(*net_, inputs_, targets_, grads_, ws_);
  if (!std::isfinite(loss))
    throw TrainingDiverged("non-finite training loss",
                           static_cast<int>(episode_index_));
  sgd_apply(*net_, grads_, cfg_.learning_rate, cfg_.momentum, &velocity_);
  if (!net_->all_finite())
    throw TrainingDiverged("network weights left the finite range",
                           static_cast<int>(episode_index_));
  ++gradient_steps_;
  if (gradient_steps_ % cfg_.target_sync_interval == 0) *target_ = *net_;
  return loss;
}

void Trainer::write_checkpoint(long episodes_done) const {
  fs::create_directories(cfg_.checkpoint_dir);
  CheckpointMeta meta{episodes_done, cfg_.seed, gradient_steps_,
                      cfg_.time_channel};
  const fs::path dir(cfg_.checkpoint_dir);
  const std::string name = std::string(to_string(cfg_.arch)) + "_episode_" +
                           std::to_string(episodes_done) + ".json";
  save_checkpoint((dir / name).string(), *net_, meta);
  save_state((dir / "train_state.cbor").string());
}

TrainResult Trainer::run(const EpisodeCallback& on_episode) {
  const EnvParams& p = env_->params();
  DrlActor actor(*env_, net_, cfg_.time_channel);
  DrlActor target_actor(*env_, target_, cfg_.time_channel);

  TrainResult out;
  out.history.reserve(
      static_cast<size_t>(std::max<long>(0, cfg_.episodes - episode_index_)));

  for (long e = episode_index_; e < cfg_.episodes; ++e) {
    Rng rng = episode_rng(cfg_.seed, static_cast<std::uint64_t>(e));
    Scenario sc;
    sc.truth = hypothesis_from_index(p, rng.uniform_int(p.n_hypotheses()));
    sc.seed = splitmix64(cfg_.seed ^ static_cast<std::uint64_t>(e));

    auto reset = env_->reset(sc, rng, cfg_.horizon);
    BeliefState state = std::move(reset.state);
    const double eps = epsilon_at(cfg_, e);
    double cum_entropy = 0.0;
    double loss_sum = 0.0;
    int updates = 0;

    while (state.step < cfg_.horizon) {
      replay_.push(state);
      Action a;
      if (rng.uniform() < eps) {
        const auto feasible = env_->feasible_actions(state.pos);
        a = feasible[static_cast<size_t>(
            rng.uniform_int(static_cast<int>(feasible.size())))];
      } else {
        a = actor.act(state, rng);
      }
      auto sr = env_->step(state, a, sc, rng);
      state = std::move(sr.next);
      cum_entropy += entropy(state.belief);
      ++env_steps_;
      if (env_steps_ % cfg_.update_every == 0 &&
          replay_.size() >= cfg_.batch_size) {
        loss_sum += update(rng, target_actor);
        ++updates;
      }
    }

    episode_index_ = e + 1;
    TrainEpisodeRow row{e, updates > 0 ? loss_sum / updates : 0.0, cum_entropy,
                        eps};
    full_history_.push_back(row);
    out.history.push_back(row);
    if (on_episode) on_episode(row);
    if (cfg_.checkpoint_every > 0 && !cfg_.checkpoint_dir.empty() &&
        episode_index_ % cfg_.checkpoint_every == 0) {
      write_checkpoint(episode_index_);
    }
  }

  out.net = *net_;
  out.gradient_steps = gradient_steps_;
  out.episodes = episode_index_;
  return out;
}

namespace {

constexpr const char* kStateTag = "plume-ste-train-state";
constexpr int kStateVersion = 1;

json config_to_json(const TrainConfig& c) {
  return json{{"arch", to_string(c.arch)},
              {"horizon", c.horizon},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"epsilon_start", c.epsilon_start},
              {"epsilon_end", c.epsilon_end},
              {"epsilon_decay_fraction", c.epsilon_decay_fraction},
              {"episodes", c.episodes},
              {"replay_capacity", c.replay_capacity},
              {"target_sync_interval", c.target_sync_interval},
              {"update_every", c.update_every},
              {"time_channel", c.time_channel},
              {"seed", c.seed}};
}

void require_state(bool ok, const std::string& msg) {
  if (!ok) throw CheckpointError(msg);
}

// Every field here changes the run trajectory, so a resume with a different
// value would silently train a different model. episodes is exempt: extending
// a run is allowed, at the cost of stretching the exploration schedule.
void check_config_match(const TrainConfig& cfg, const json& saved) {
  const json now = config_to_json(cfg);
  for (const auto& [key, value] : now.items()) {
    if (key == "episodes") continue;
    require_state(saved.contains(key), "train state: config is missing " + key);
    if (saved.at(key) != value) {
      throw CheckpointError("train state: config mismatch on '" + key +
                            "' (saved " + saved.at(key).dump() + ", requested " +
                            value.dump() + ")");
    }
  }
}

}  // namespace

void Trainer::save_state(const std::string& path) const {
  const EnvParams& p = env_->params();
  json replay = {{"capacity", replay_.capacity()}, {"head", replay_.head()}};
  const int n = replay_.size();
  std::vector<int> xs(static_cast<size_t>(n)), ys(static_cast<size_t>(n)),
      steps(static_cast<size_t>(n));
  std::vector<double> beliefs;
  beliefs.reserve(static_cast<size_t>(n) * static_cast<size_t>(p.n_hypotheses()));
  for (int i = 0; i < n; ++i) {
    const BeliefState& s = replay_.at(i);
    xs[static_cast<size_t>(i)] = s.pos.x;
    ys[static_cast<size_t>(i)] = s.pos.y;
    steps[static_cast<size_t>(i)] = s.step;
    beliefs.insert(beliefs.end(), s.belief.probs().begin(), s.belief.probs().end());
  }
  replay["pos_x"] = xs;
  replay["pos_y"] = ys;
  replay["step"] = steps;
  replay["beliefs"] = beliefs;

  json history = json::object();
  {
    const size_t rows = full_history_.size();
    std::vector<long> eps_idx(rows);
    std::vector<double> loss(rows), cum(rows), eps(rows);
    for (size_t i = 0; i < rows; ++i) {
      eps_idx[i] = full_history_[i].episode;
      loss[i] = full_history_[i].loss;
      cum[i] = full_history_[i].cumulative_entropy;
      eps[i] = full_history_[i].epsilon;
    }
    history["episode"] = eps_idx;
    history["loss"] = loss;
    history["cumulative_entropy"] = cum;
    history["epsilon"] = eps;
  }

  json state = {{"format", kStateTag},
                {"version", kStateVersion},
                {"config", config_to_json(cfg_)},
                {"episode_index", episode_index_},
                {"gradient_steps", gradient_steps_},
                {"env_steps", env_steps_},
                {"network", network_to_json(*net_)},
                {"target", network_to_json(*target_)},
                {"velocity", network_to_json(velocity_)},
                {"replay", std::move(replay)},
                {"history", std::move(history)}};

  const std::vector<std::uint8_t> blob = json::to_cbor(state);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

Trainer Trainer::load_state(const Environment& env, TrainConfig cfg,
                            const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  json state;
  try {
    state = json::from_cbor(blob);
  } catch (const json::exception& e) {
    throw CheckpointError(path + ": " + e.what());
  }
  require_state(state.is_object() && state.value("format", "") == kStateTag,
                path + ": not a training state file");
  require_state(state.value("version", -1) == kStateVersion,
                path + ": unsupported training state version");

  Trainer t(env, std::move(cfg));
  try {
    check_config_match(t.cfg_, state.at("config"));
    t.episode_index_ = state.at("episode_index").get<long>();
    t.gradient_steps_ = state.at("gradient_steps").get<long>();
    t.env_steps_ = state.at("env_steps").get<long>();
    *t.net_ = network_from_json(state.at("network"));
    *t.target_ = network_from_json(state.at("target"));
    t.velocity_ = network_from_json(state.at("velocity"));

    const json& replay = state.at("replay");
    const EnvParams& p = env.params();
    require_state(replay.at("capacity").get<int>() == t.replay_.capacity(),
                  "train state: replay capacity mismatch");
    const auto xs = replay.at("pos_x").get<std::vector<int>>();
    const auto ys = replay.at("pos_y").get<std::vector<int>>();
    const auto steps = replay.at("step").get<std::vector<int>>();
    const auto beliefs = replay.at("beliefs").get<std::vector<double>>();
    const size_t n = xs.size();
    require_state(ys.size() == n && steps.size() == n,
                  "train state: replay arrays disagree on length");
    const size_t n_hyp = static_cast<size_t>(p.n_hypotheses());
    require_state(beliefs.size() == n * n_hyp,
                  "train state: replay belief block has the wrong size");
    std::vector<BeliefState> items;
    items.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      BeliefState s;
      s.pos = {xs[i], ys[i]};
      s.step = steps[i];
      s.horizon = t.cfg_.horizon;
      require_state(p.contains(s.pos) && s.step >= 0 && s.step < s.horizon,
                    "train state: replay entry out of range");
      std::vector<double> probs(beliefs.begin() + static_cast<long>(i * n_hyp),
                                beliefs.begin() + static_cast<long>((i + 1) * n_hyp));
      double total = 0.0;
      for (double v : probs) {
        require_state(std::isfinite(v) && v >= 0.0,
                      "train state: replay belief has an invalid probability");
        total += v;
      }
      require_state(std::abs(total - 1.0) < 1e-6,
                    "train state: replay belief is not normalized");
      s.belief = Belief(p.nx, p.ny, p.n_fluxes(), std::move(probs));
      items.push_back(std::move(s));
    }
    t.replay_.restore(std::move(items), replay.at("head").get<int>());

    const json& history = state.at("history");
    const auto h_ep = history.at("episode").get<std::vector<long>>();
    const auto h_loss = history.at("loss").get<std::vector<double>>();
    const auto h_cum = history.at("cumulative_entropy").get<std::vector<double>>();
    const auto h_eps = history.at("epsilon").get<std::vector<double>>();
    const size_t rows = h_ep.size();
    require_state(h_loss.size() == rows && h_cum.size() == rows &&
                      h_eps.size() == rows,
                  "train state: history arrays disagree on length");
    require_state(static_cast<long>(rows) == t.episode_index_,
                  "train state: history does not cover the completed episodes");
    t.full_history_.resize(rows);
    for (size_t i = 0; i < rows; ++i)
      t.full_history_[i] = {h_ep[i], h_loss[i], h_cum[i], h_eps[i]};
  } catch (const json::exception& e) {
    throw CheckpointError(path + ": " + e.what());
  }

  const InputGeometry geo = input_geometry(env.params(), t.cfg_.time_channel);
  require_state(t.net_->input == geo,
                "train state: network geometry does not match this environment");
  require_state(t.episode_index_ >= 0 && t.gradient_steps_ >= 0 &&
                    t.env_steps_ >= 0,
                "train state: negative counters");
  return t;
}

}  // namespace ste
