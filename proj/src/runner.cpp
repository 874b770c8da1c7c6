#include "ste/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ste/belief.hpp"
#include "ste/checkpoint.hpp"
#include "ste/drl.hpp"
#include "ste/environment.hpp"
#include "ste/errors.hpp"
#include "ste/evaluation.hpp"
#include "ste/infotaxis.hpp"
#include "ste/oracle.hpp"
#include "ste/plume.hpp"
#include "ste/sweep.hpp"
#include "ste/training.hpp"

namespace fs = std::filesystem;

namespace ste {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config document plumbing

json parse_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  return doc;
}

// Typo protection: an ignored key silently changes an experiment.
void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (key == k) {
        known = true;
        break;
      }
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

const json kEmpty = json::object();

const json& block(const json& doc, const char* name) {
  if (!doc.contains(name)) return kEmpty;
  const json& b = doc.at(name);
  if (!b.is_object())
    throw ConfigError(std::string(name) + " must be a JSON object");
  return b;
}

struct Common {
  std::uint64_t seed = 1;
  int threads = 1;
  fs::path output_dir;
};

int env_thread_fallback() {
  const char* v = std::getenv("PLUME_STE_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1)
    throw ConfigError("PLUME_STE_THREADS must be a positive integer");
  return static_cast<int>(n);
}

// One document can describe a whole experiment; each command reads the
// globals, the environment, and its own block, and leaves the rest alone.
Common read_common(const json& doc) {
  reject_unknown(doc, "configuration",
                 {"seed", "threads", "output_dir", "environment", "simulate",
                  "train", "evaluate", "sweep", "oracle"});
  Common c;
  c.seed = get_or<std::uint64_t>(doc, "seed", 1, "configuration");
  c.threads = doc.contains("threads")
                  ? get_or<int>(doc, "threads", 1, "configuration")
                  : env_thread_fallback();
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  const std::string dir =
      get_or<std::string>(doc, "output_dir", "out", "configuration");
  if (dir.empty()) throw ConfigError("output_dir must not be empty");
  c.output_dir = dir;
  return c;
}

EnvParams read_environment(const json& doc) {
  const json& b = block(doc, "environment");
  reject_unknown(b, "environment",
                 {"nx", "ny", "fluxes", "wind_speed", "diffusivity", "lifetime",
                  "radius", "dt", "h_max", "self_distance"});
  EnvParams p;
  p.nx = get_or(b, "nx", p.nx, "environment");
  p.ny = get_or(b, "ny", p.ny, "environment");
  p.fluxes = get_or(b, "fluxes", p.fluxes, "environment");
  p.wind_speed = get_or(b, "wind_speed", p.wind_speed, "environment");
  p.diffusivity = get_or(b, "diffusivity", p.diffusivity, "environment");
  p.lifetime = get_or(b, "lifetime", p.lifetime, "environment");
  p.radius = get_or(b, "radius", p.radius, "environment");
  p.dt = get_or(b, "dt", p.dt, "environment");
  p.h_max = get_or(b, "h_max", p.h_max, "environment");
  p.self_distance = get_or(b, "self_distance", p.self_distance, "environment");
  p.validate();
  return p;
}

json environment_to_json(const EnvParams& p) {
  return json{{"nx", p.nx},
              {"ny", p.ny},
              {"fluxes", p.fluxes},
              {"wind_speed", p.wind_speed},
              {"diffusivity", p.diffusivity},
              {"lifetime", p.lifetime},
              {"radius", p.radius},
              {"dt", p.dt},
              {"h_max", p.h_max},
              {"self_distance", p.self_distance}};
}

TrainConfig read_train(const json& doc, const Common& c) {
  const json& b = block(doc, "train");
  reject_unknown(b, "train",
                 {"arch", "episodes", "horizon", "batch_size", "learning_rate",
                  "momentum", "epsilon_start", "epsilon_end",
                  "epsilon_decay_fraction", "replay_capacity",
                  "target_sync_interval", "update_every", "time_channel",
                  "checkpoint_every", "resume"});
  TrainConfig t;
  const std::string arch =
      get_or<std::string>(b, "arch", to_string(t.arch), "train");
  try {
    t.arch = arch_from_string(arch);
  } catch (const std::exception&) {
    throw ConfigError("train.arch must be 'fc' or 'cnn', got '" + arch + "'");
  }
  t.episodes = get_or(b, "episodes", t.episodes, "train");
  t.horizon = get_or(b, "horizon", t.horizon, "train");
  t.batch_size = get_or(b, "batch_size", t.batch_size, "train");
  t.learning_rate = get_or(b, "learning_rate", t.learning_rate, "train");
  t.momentum = get_or(b, "momentum", t.momentum, "train");
  t.epsilon_start = get_or(b, "epsilon_start", t.epsilon_start, "train");
  t.epsilon_end = get_or(b, "epsilon_end", t.epsilon_end, "train");
  t.epsilon_decay_fraction =
      get_or(b, "epsilon_decay_fraction", t.epsilon_decay_fraction, "train");
  t.replay_capacity = get_or(b, "replay_capacity", t.replay_capacity, "train");
  t.target_sync_interval =
      get_or(b, "target_sync_interval", t.target_sync_interval, "train");
  t.update_every = get_or(b, "update_every", t.update_every, "train");
  t.time_channel = get_or(b, "time_channel", t.time_channel, "train");
  t.checkpoint_every = get_or(b, "checkpoint_every", t.checkpoint_every, "train");
  t.seed = c.seed;
  return t;
}

json train_to_json(const TrainConfig& t, bool resume) {
  return json{{"arch", to_string(t.arch)},
              {"episodes", t.episodes},
              {"horizon", t.horizon},
              {"batch_size", t.batch_size},
              {"learning_rate", t.learning_rate},
              {"momentum", t.momentum},
              {"epsilon_start", t.epsilon_start},
              {"epsilon_end", t.epsilon_end},
              {"epsilon_decay_fraction", t.epsilon_decay_fraction},
              {"replay_capacity", t.replay_capacity},
              {"target_sync_interval", t.target_sync_interval},
              {"update_every", t.update_every},
              {"time_channel", t.time_channel},
              {"checkpoint_every", t.checkpoint_every},
              {"resume", resume}};
}

// FNV-1a over the canonical (key-sorted) dump of the resolved document.
std::string config_hash(const json& resolved) {
  const std::string s = resolved.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

// Shortest representation that parses back to the same double.
std::string fmt(double v) { return json(v).dump(); }

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string header_line(const std::string& hash, std::uint64_t seed) {
  return "# config=" + hash + " seed=" + std::to_string(seed) + "\n";
}

// The resolved document pins everything that determines the numbers: command,
// seed, environment, and the command's own block. Thread count and output
// directory only move wall time and file placement, so they stay out of the
// document and its hash.
json resolved_document(const char* command, const Common& c, const EnvParams& p,
                       const char* block_name, json block_body) {
  return json{{"command", command},
              {"seed", c.seed},
              {"environment", environment_to_json(p)},
              {block_name, std::move(block_body)}};
}

void write_resolved(const Common& c, const json& resolved) {
  write_text(c.output_dir / "resolved_config.json", resolved.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Policy selection shared by simulate and eval

struct SelectedPolicy {
  PolicyFactory factory;
  std::string label;  // infotaxis | random | fc | cnn
};

SelectedPolicy select_policy(const Environment& env, const std::string& kind,
                             const std::string& checkpoint,
                             const std::string& where) {
  if (kind == "infotaxis") return {infotaxis_policy(), "infotaxis"};
  if (kind == "random") return {random_policy(), "random"};
  if (kind == "checkpoint") {
    if (checkpoint.empty())
      throw ConfigError(where + ": policy 'checkpoint' needs a checkpoint path");
    LoadedCheckpoint lc = load_checkpoint(checkpoint);
    if (lc.net.input != input_geometry(env.params(), lc.meta.time_channel))
      throw CheckpointError(checkpoint +
                            ": network geometry does not match the environment");
    const std::string label = to_string(lc.net.kind);
    auto net = std::make_shared<Network>(std::move(lc.net));
    return {drl_policy(std::move(net), lc.meta.time_channel), label};
  }
  throw ConfigError(where + ".policy must be 'infotaxis', 'random', or "
                            "'checkpoint', got '" + kind + "'");
}

json percentiles_to_json(const Percentiles& p) {
  return json{{"median", p.median}, {"p75", p.p75}};
}

json metrics_to_json(const PolicyMetrics& m, const EnvParams& p) {
  json by_cell = json::array();
  json n_cell = json::array();
  for (int y = 0; y < p.ny; ++y) {
    json row = json::array(), nrow = json::array();
    for (int x = 0; x < p.nx; ++x) {
      row.push_back(m.success_by_cell[static_cast<size_t>(y * p.nx + x)]);
      nrow.push_back(m.episodes_by_cell[static_cast<size_t>(y * p.nx + x)]);
    }
    by_cell.push_back(std::move(row));
    n_cell.push_back(std::move(nrow));
  }
  return json{{"episodes", m.episodes},
              {"success_rate", m.success_rate},
              {"mean_cumulative_entropy", m.mean_cumulative_entropy},
              {"mean_final_entropy", m.mean_final_entropy},
              {"mean_truth_probability", m.mean_truth_probability},
              {"rel_drps", json{{"x", percentiles_to_json(m.rel_drps_x)},
                                {"y", percentiles_to_json(m.rel_drps_y)},
                                {"phi", percentiles_to_json(m.rel_drps_phi)}}},
              {"success_by_flux", m.success_by_flux},
              {"episodes_by_flux", m.episodes_by_flux},
              {"success_by_cell", std::move(by_cell)},
              {"episodes_by_cell", std::move(n_cell)}};
}

// One metrics-CSV block for a policy evaluated under (V, D).
void append_metric_rows(std::ostringstream& csv, const std::string& policy,
                        const EnvParams& p, const PolicyMetrics& m) {
  const std::string vd = fmt(p.wind_speed) + "," + fmt(p.diffusivity);
  auto row = [&](const std::string& metric, const std::string& flux,
                 const std::string& value) {
    csv << metric << "," << policy << "," << vd << "," << flux << "," << value
        << "\n";
  };
  row("episodes", "", std::to_string(m.episodes));
  row("success_rate", "", fmt(m.success_rate));
  row("mean_cumulative_entropy", "", fmt(m.mean_cumulative_entropy));
  row("mean_final_entropy", "", fmt(m.mean_final_entropy));
  row("mean_truth_probability", "", fmt(m.mean_truth_probability));
  row("rel_drps_x_median", "", fmt(m.rel_drps_x.median));
  row("rel_drps_x_p75", "", fmt(m.rel_drps_x.p75));
  row("rel_drps_y_median", "", fmt(m.rel_drps_y.median));
  row("rel_drps_y_p75", "", fmt(m.rel_drps_y.p75));
  row("rel_drps_phi_median", "", fmt(m.rel_drps_phi.median));
  row("rel_drps_phi_p75", "", fmt(m.rel_drps_phi.p75));
  for (size_t f = 0; f < m.success_by_flux.size(); ++f) {
    row("episodes", fmt(p.fluxes[f]), std::to_string(m.episodes_by_flux[f]));
    row("success_rate", fmt(p.fluxes[f]), fmt(m.success_by_flux[f]));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// simulate

std::string run_simulate(const std::string& config_json) {
  const json doc = parse_document(config_json);
  const Common c = read_common(doc);
  const EnvParams p = read_environment(doc);

  const json& b = block(doc, "simulate");
  reject_unknown(b, "simulate",
                 {"policy", "checkpoint", "episodes", "horizon", "truth",
                  "emit_field"});
  const std::string policy_kind =
      get_or<std::string>(b, "policy", "infotaxis", "simulate");
  const std::string checkpoint =
      get_or<std::string>(b, "checkpoint", "", "simulate");
  const long episodes = get_or<long>(b, "episodes", 1, "simulate");
  const int horizon = get_or<int>(b, "horizon", 20, "simulate");
  const bool emit_field = get_or<bool>(b, "emit_field", false, "simulate");
  if (episodes < 1) throw ConfigError("simulate.episodes must be at least 1");
  if (horizon < 1) throw ConfigError("simulate.horizon must be positive");

  bool has_truth = false;
  SourceTerm truth;
  if (b.contains("truth") && !b.at("truth").is_null()) {
    const json& t = b.at("truth");
    if (!t.is_array() || t.size() != 3)
      throw ConfigError("simulate.truth must be [xs, ys, phi]");
    try {
      truth.xs = t[0].get<int>();
      truth.ys = t[1].get<int>();
      truth.phi = t[2].get<double>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("simulate.truth: ") + e.what());
    }
    if (!p.contains({truth.xs, truth.ys}))
      throw ConfigError("simulate.truth position is outside the grid");
    flux_index_of(p, truth.phi);  // throws ConfigError when absent
    has_truth = true;
  }
  if (emit_field && !has_truth)
    throw ConfigError("simulate.emit_field needs an explicit truth");

  json resolved_block = {{"policy", policy_kind},
                         {"checkpoint", checkpoint},
                         {"episodes", episodes},
                         {"horizon", horizon},
                         {"emit_field", emit_field}};
  resolved_block["truth"] =
      has_truth ? json::array({truth.xs, truth.ys, truth.phi}) : json();
  const json resolved = resolved_document("simulate", c, p, "simulate",
                                          std::move(resolved_block));
  const std::string hash = config_hash(resolved);

  Environment env(p);
  SelectedPolicy sel = select_policy(env, policy_kind, checkpoint, "simulate");
  Policy policy = sel.factory(env);

  write_resolved(c, resolved);

  json episodes_out = json::array();
  for (long e = 0; e < episodes; ++e) {
    Rng rng = episode_rng(c.seed, static_cast<std::uint64_t>(e));
    Scenario sc;
    sc.truth = has_truth ? truth
                         : hypothesis_from_index(
                               p, rng.uniform_int(p.n_hypotheses()));
    sc.seed = splitmix64(c.seed ^ static_cast<std::uint64_t>(e));

    std::vector<TrajectoryPoint> traj;
    const EpisodeResult r =
        run_episode(env, policy, sc, horizon, rng, false, &traj);

    std::ostringstream csv;
    csv << header_line(hash, c.seed);
    csv << "step,x,y,action,hits,entropy,reward\n";
    for (const TrajectoryPoint& t : traj) {
      csv << t.step << "," << t.pos.x << "," << t.pos.y << ","
          << (t.has_action ? to_string(t.action) : "") << "," << t.hits << ","
          << fmt(t.entropy) << "," << (t.has_action ? fmt(t.reward) : "")
          << "\n";
    }
    const std::string name = "trajectory_" + std::to_string(e) + ".csv";
    write_text(c.output_dir / name, csv.str());

    episodes_out.push_back(
        json{{"file", name},
             {"truth", {sc.truth.xs, sc.truth.ys, sc.truth.phi}},
             {"success", r.success},
             {"aborted", r.aborted},
             {"truth_probability", r.truth_probability},
             {"final_entropy", r.final_entropy},
             {"cumulative_entropy", r.cumulative_entropy},
             {"total_hits", r.total_hits},
             {"steps", static_cast<long>(traj.size()) - 1}});
  }

  if (emit_field) {
    const HitField field = mean_hit_map(truth, p);
    std::ostringstream csv;
    csv << header_line(hash, c.seed);
    csv << "x,y,mu\n";
    for (int y = 0; y < p.ny; ++y)
      for (int x = 0; x < p.nx; ++x)
        csv << x << "," << y << "," << fmt(field.at(x, y)) << "\n";
    write_text(c.output_dir / "field.csv", csv.str());
  }

  json summary = {{"command", "simulate"},
                  {"config", hash},
                  {"seed", c.seed},
                  {"policy", sel.label},
                  {"output_dir", c.output_dir.string()},
                  {"episodes", std::move(episodes_out)}};
  if (emit_field) summary["field_file"] = "field.csv";
  return summary.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// train

std::string run_train(const std::string& config_json) {
  const json doc = parse_document(config_json);
  const Common c = read_common(doc);
  const EnvParams p = read_environment(doc);

  TrainConfig tcfg = read_train(doc, c);
  const bool resume = get_or(block(doc, "train"), "resume", true, "train");
  tcfg.checkpoint_dir = c.output_dir.string();
  tcfg.validate();

  const json resolved =
      resolved_document("train", c, p, "train", train_to_json(tcfg, resume));
  const std::string hash = config_hash(resolved);

  Environment env(p);
  const fs::path state_path = c.output_dir / "train_state.cbor";

  write_resolved(c, resolved);

  std::error_code ec;
  const bool resuming = resume && fs::exists(state_path, ec);
  Trainer trainer = resuming ? Trainer::load_state(env, tcfg, state_path.string())
                             : Trainer(env, tcfg);
  const long start_episode = trainer.episode_index();

  const TrainResult res = trainer.run();

  const std::string final_name =
      std::string(to_string(tcfg.arch)) + "_final.json";
  CheckpointMeta meta{res.episodes, tcfg.seed, res.gradient_steps,
                      tcfg.time_channel};
  save_checkpoint((c.output_dir / final_name).string(), res.net, meta);
  trainer.save_state(state_path.string());

  std::ostringstream csv;
  csv << header_line(hash, c.seed);
  csv << "episode,loss,cumulative_entropy,epsilon\n";
  for (const TrainEpisodeRow& row : trainer.history()) {
    csv << row.episode << "," << fmt(row.loss) << ","
        << fmt(row.cumulative_entropy) << "," << fmt(row.epsilon) << "\n";
  }
  write_text(c.output_dir / "history.csv", csv.str());

  json summary = {{"command", "train"},
                  {"config", hash},
                  {"seed", c.seed},
                  {"arch", to_string(tcfg.arch)},
                  {"episodes", res.episodes},
                  {"episodes_run", res.episodes - start_episode},
                  {"resumed_from", resuming ? json(start_episode) : json()},
                  {"gradient_steps", res.gradient_steps},
                  {"checkpoint", final_name},
                  {"history", "history.csv"},
                  {"output_dir", c.output_dir.string()}};
  if (!trainer.history().empty()) {
    summary["final_loss"] = trainer.history().back().loss;
    summary["final_cumulative_entropy"] =
        trainer.history().back().cumulative_entropy;
  }
  return summary.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// eval

std::string run_eval(const std::string& config_json) {
  const json doc = parse_document(config_json);
  const Common c = read_common(doc);
  const EnvParams p = read_environment(doc);

  const json& b = block(doc, "evaluate");
  reject_unknown(b, "evaluate",
                 {"policy", "checkpoint", "episodes", "horizon", "per_flux",
                  "count_initial_entropy"});
  const std::string policy_kind =
      get_or<std::string>(b, "policy", "infotaxis", "evaluate");
  const std::string checkpoint =
      get_or<std::string>(b, "checkpoint", "", "evaluate");

  EvalConfig ecfg;
  ecfg.episodes = get_or<long>(b, "episodes", 5000, "evaluate");
  ecfg.horizon = get_or<int>(b, "horizon", 20, "evaluate");
  const bool per_flux = get_or<bool>(b, "per_flux", false, "evaluate");
  ecfg.mixture = per_flux ? Mixture::per_flux : Mixture::uniform;
  ecfg.count_initial_entropy =
      get_or<bool>(b, "count_initial_entropy", false, "evaluate");
  ecfg.seed = c.seed;
  ecfg.threads = c.threads;

  const json resolved = resolved_document(
      "eval", c, p, "evaluate",
      json{{"policy", policy_kind},
           {"checkpoint", checkpoint},
           {"episodes", ecfg.episodes},
           {"horizon", ecfg.horizon},
           {"per_flux", per_flux},
           {"count_initial_entropy", ecfg.count_initial_entropy}});
  const std::string hash = config_hash(resolved);

  Environment env(p);
  SelectedPolicy sel = select_policy(env, policy_kind, checkpoint, "evaluate");

  write_resolved(c, resolved);

  const EvalResult res = evaluate(env, sel.factory, ecfg);

  long aborted = 0;
  for (const EpisodeResult& r : res.episodes) aborted += r.aborted ? 1 : 0;

  std::ostringstream csv;
  csv << header_line(hash, c.seed);
  csv << "metric,policy,V,D,flux,value\n";
  append_metric_rows(csv, sel.label, p, res.metrics);
  write_text(c.output_dir / "metrics.csv", csv.str());

  json summary = {{"command", "eval"},
                  {"config", hash},
                  {"seed", c.seed},
                  {"policy", sel.label},
                  {"per_flux", per_flux},
                  {"aborted_episodes", aborted},
                  {"metrics", metrics_to_json(res.metrics, p)},
                  {"output_dir", c.output_dir.string()}};
  const std::string text = summary.dump(2) + "\n";
  write_text(c.output_dir / "summary.json", text);
  return text;
}

// ---------------------------------------------------------------------------
// sweep

std::string run_sweep(const std::string& config_json) {
  const json doc = parse_document(config_json);
  const Common c = read_common(doc);
  const EnvParams p = read_environment(doc);

  const json& b = block(doc, "sweep");
  reject_unknown(b, "sweep",
                 {"v_values", "d_values", "episodes", "horizon", "per_flux",
                  "with_drl", "train_missing", "checkpoint_dir",
                  "cell_threads"});

  SweepConfig scfg;
  scfg.base = p;
  scfg.v_values = get_or(b, "v_values", scfg.v_values, "sweep");
  scfg.d_values = get_or(b, "d_values", scfg.d_values, "sweep");
  scfg.episodes = get_or(b, "episodes", scfg.episodes, "sweep");
  scfg.horizon = get_or(b, "horizon", scfg.horizon, "sweep");
  scfg.mixture = get_or(b, "per_flux", false, "sweep") ? Mixture::per_flux
                                                       : Mixture::uniform;
  scfg.with_drl = get_or(b, "with_drl", scfg.with_drl, "sweep");
  scfg.train_missing = get_or(b, "train_missing", scfg.train_missing, "sweep");
  scfg.checkpoint_dir = get_or<std::string>(
      b, "checkpoint_dir", (c.output_dir / "cells").string(), "sweep");
  scfg.cell_threads = get_or(b, "cell_threads", scfg.cell_threads, "sweep");
  scfg.seed = c.seed;
  scfg.eval_threads = c.threads;
  scfg.train = read_train(doc, c);  // per-cell training template

  json resolved_block = {{"v_values", scfg.v_values},
                         {"d_values", scfg.d_values},
                         {"episodes", scfg.episodes},
                         {"horizon", scfg.horizon},
                         {"per_flux", scfg.mixture == Mixture::per_flux},
                         {"with_drl", scfg.with_drl},
                         {"train_missing", scfg.train_missing},
                         {"checkpoint_dir", scfg.checkpoint_dir},
                         {"cell_threads", scfg.cell_threads}};
  json resolved = resolved_document("sweep", c, p, "sweep",
                                    std::move(resolved_block));
  if (scfg.with_drl) resolved["train"] = train_to_json(scfg.train, false);
  const std::string hash = config_hash(resolved);

  write_resolved(c, resolved);

  const std::vector<SweepCell> cells = sensitivity_sweep(scfg);

  std::ostringstream csv;
  csv << header_line(hash, c.seed);
  csv << "policy,V,D,axis,percentile,value\n";
  auto rows = [&](const std::string& policy, const SweepCell& cell,
                  const PolicyMetrics& m) {
    const std::string vd = fmt(cell.wind_speed) + "," + fmt(cell.diffusivity);
    auto row = [&](const char* axis, int pct, double value) {
      csv << policy << "," << vd << "," << axis << "," << pct << ","
          << fmt(value) << "\n";
    };
    row("x", 50, m.rel_drps_x.median);
    row("x", 75, m.rel_drps_x.p75);
    row("y", 50, m.rel_drps_y.median);
    row("y", 75, m.rel_drps_y.p75);
    row("phi", 50, m.rel_drps_phi.median);
    row("phi", 75, m.rel_drps_phi.p75);
  };
  json cells_out = json::array();
  for (const SweepCell& cell : cells) {
    rows("infotaxis", cell, cell.infotaxis);
    if (cell.drl) rows("drl", cell, *cell.drl);
    json jc = {{"V", cell.wind_speed},
               {"D", cell.diffusivity},
               {"infotaxis", metrics_to_json(cell.infotaxis, p)},
               {"train_episodes", cell.train_episodes}};
    if (cell.drl) jc["drl"] = metrics_to_json(*cell.drl, p);
    cells_out.push_back(std::move(jc));
  }
  write_text(c.output_dir / "sweep.csv", csv.str());

  json summary = {{"command", "sweep"},
                  {"config", hash},
                  {"seed", c.seed},
                  {"cells", std::move(cells_out)},
                  {"output_dir", c.output_dir.string()}};
  const std::string text = summary.dump(2) + "\n";
  write_text(c.output_dir / "summary.json", text);
  return text;
}

// ---------------------------------------------------------------------------
// oracle

namespace {

Belief random_oracle_belief(const EnvParams& p, Rng& rng) {
  std::vector<double> probs(static_cast<size_t>(p.n_hypotheses()));
  double sum = 0.0;
  for (double& v : probs) {
    v = rng.uniform() + 1e-9;
    sum += v;
  }
  for (double& v : probs) v /= sum;
  return Belief(p.nx, p.ny, p.n_fluxes(), std::move(probs));
}

}  // namespace

std::string run_oracle(const std::string& config_json) {
  const json doc = parse_document(config_json);
  const Common c = read_common(doc);
  const EnvParams p = read_environment(doc);

  const json& b = block(doc, "oracle");
  reject_unknown(b, "oracle", {"states", "horizon", "max_nodes", "checkpoint"});
  const int states = get_or(b, "states", 100, "oracle");
  const int horizon = get_or(b, "horizon", 1, "oracle");
  const double max_nodes = get_or(b, "max_nodes", 1e6, "oracle");
  const std::string checkpoint = get_or<std::string>(b, "checkpoint", "", "oracle");
  if (states < 1) throw ConfigError("oracle.states must be at least 1");
  if (horizon < 1) throw ConfigError("oracle.horizon must be positive");

  const json resolved = resolved_document(
      "oracle", c, p, "oracle",
      json{{"states", states},
           {"horizon", horizon},
           {"max_nodes", max_nodes},
           {"checkpoint", checkpoint}});
  const std::string hash = config_hash(resolved);

  Environment env(p);

  std::unique_ptr<DrlActor> actor;
  if (!checkpoint.empty()) {
    LoadedCheckpoint lc = load_checkpoint(checkpoint);
    if (lc.net.input != input_geometry(p, lc.meta.time_channel))
      throw CheckpointError(checkpoint +
                            ": network geometry does not match the environment");
    actor = std::make_unique<DrlActor>(
        env, std::make_shared<Network>(std::move(lc.net)), lc.meta.time_channel);
  }

  write_resolved(c, resolved);

  DeterministicPolicy greedy = [&env](const BeliefState& s) {
    return infotaxis_tied_set(s, env).front();
  };

  std::ostringstream csv;
  csv << header_line(hash, c.seed);
  csv << "state,x,y,optimal_value,optimal_action,infotaxis_action,"
         "infotaxis_agrees,greedy_value,drl_action,drl_agrees\n";

  int infotaxis_agree = 0, drl_agree = 0;
  double sum_optimal = 0.0, sum_greedy = 0.0, worst_excess = 0.0;
  for (int i = 0; i < states; ++i) {
    Rng rng = episode_rng(c.seed, static_cast<std::uint64_t>(i));
    GridPos pos{rng.uniform_int(p.nx), rng.uniform_int(p.ny)};
    BeliefState state{pos, random_oracle_belief(p, rng), 0, horizon};

    const double vstar = optimal_value(env, state, max_nodes);
    const Action astar = optimal_action(env, state, max_nodes);
    const Action greedy_first = greedy(state);
    const double vgreedy = policy_value(env, state, greedy, max_nodes);
    const bool agrees = astar == greedy_first;
    infotaxis_agree += agrees ? 1 : 0;
    sum_optimal += vstar;
    sum_greedy += vgreedy;
    worst_excess = std::max(worst_excess, vgreedy - vstar);

    csv << i << "," << pos.x << "," << pos.y << "," << fmt(vstar) << ","
        << to_string(astar) << "," << to_string(greedy_first) << ","
        << (agrees ? 1 : 0) << "," << fmt(vgreedy) << ",";
    if (actor) {
      const Action adrl = actor->tied_set(state).front();
      const bool dagree = adrl == astar;
      drl_agree += dagree ? 1 : 0;
      csv << to_string(adrl) << "," << (dagree ? 1 : 0);
    } else {
      csv << ",";
    }
    csv << "\n";
  }
  write_text(c.output_dir / "oracle.csv", csv.str());

  json summary = {{"command", "oracle"},
                  {"config", hash},
                  {"seed", c.seed},
                  {"states", states},
                  {"horizon", horizon},
                  {"infotaxis_agreement",
                   static_cast<double>(infotaxis_agree) / states},
                  {"mean_optimal_value", sum_optimal / states},
                  {"mean_greedy_value", sum_greedy / states},
                  {"max_greedy_excess", worst_excess},
                  {"output_dir", c.output_dir.string()}};
  if (actor)
    summary["drl_agreement"] = static_cast<double>(drl_agree) / states;
  const std::string text = summary.dump(2) + "\n";
  write_text(c.output_dir / "summary.json", text);
  return text;
}

}  // namespace ste
