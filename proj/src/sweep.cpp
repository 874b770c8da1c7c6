#include "ste/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>
#include <utility>

#include "ste/checkpoint.hpp"
#include "ste/errors.hpp"

namespace fs = std::filesystem;

namespace ste {
namespace {

std::string number_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

PolicyMetrics eval_policy(const Environment& env, const PolicyFactory& make_policy,
                          const SweepConfig& cfg) {
  EvalConfig ec;
  ec.episodes = cfg.episodes;
  ec.horizon = cfg.horizon;
  ec.seed = cfg.seed;
  ec.threads = cfg.eval_threads;
  ec.mixture = cfg.mixture;
  return evaluate(env, make_policy, ec).metrics;
}

}  // namespace

void SweepConfig::validate() const {
  if (v_values.empty()) throw ConfigError("sweep needs at least one wind speed");
  if (d_values.empty()) throw ConfigError("sweep needs at least one diffusivity");
  if (episodes <= 0) throw ConfigError("sweep evaluation episodes must be positive");
  if (horizon <= 0) throw ConfigError("sweep horizon must be positive");
  if (eval_threads < 1) throw ConfigError("sweep eval_threads must be at least 1");
  if (cell_threads < 1) throw ConfigError("sweep cell_threads must be at least 1");
  if (with_drl && train_missing) train.validate();
  for (double v : v_values) {
    EnvParams p = base;
    p.wind_speed = v;
    for (double d : d_values) {
      p.diffusivity = d;
      p.validate();
    }
  }
}

std::string cell_checkpoint_name(ArchKind arch, double v, double d) {
  return std::string(to_string(arch)) + "_V" + number_tag(v) + "_D" + number_tag(d) +
         ".json";
}

namespace {

// Loads the cell's network when its file exists, trains one otherwise (saving
// the result back when a directory is configured).
std::pair<std::shared_ptr<const Network>, bool> cell_network(const Environment& env,
                                                             const SweepConfig& cfg,
                                                             double v, double d,
                                                             SweepCell& cell) {
  const std::string name = cell_checkpoint_name(cfg.train.arch, v, d);
  fs::path file;
  if (!cfg.checkpoint_dir.empty()) file = fs::path(cfg.checkpoint_dir) / name;

  std::error_code ec;
  if (!file.empty() && fs::exists(file, ec)) {
    LoadedCheckpoint lc = load_checkpoint(file.string());
    if (lc.net.kind != cfg.train.arch)
      throw CheckpointError(file.string() + ": architecture does not match the sweep");
    if (lc.net.input != input_geometry(env.params(), lc.meta.time_channel))
      throw CheckpointError(file.string() +
                            ": input geometry does not match the sweep environment");
    cell.train_episodes = 0;
    bool tc = lc.meta.time_channel;
    return {std::make_shared<Network>(std::move(lc.net)), tc};
  }
  if (!cfg.train_missing)
    throw ConfigError("no value-network checkpoint for cell V=" + number_tag(v) +
                      " D=" + number_tag(d) + " (" +
                      (file.empty() ? name : file.string()) +
                      ") and training of missing cells is disabled");

  // The sweep owns the cell files; per-run periodic checkpoints would collide
  // across concurrently trained cells.
  TrainConfig tcfg = cfg.train;
  tcfg.checkpoint_every = 0;
  tcfg.checkpoint_dir.clear();
  Trainer trainer(env, tcfg);
  TrainResult res = trainer.run();
  cell.train_episodes = res.episodes;
  auto net = std::make_shared<Network>(std::move(res.net));
  if (!file.empty()) {
    CheckpointMeta meta;
    meta.episodes = res.episodes;
    meta.seed = tcfg.seed;
    meta.gradient_steps = res.gradient_steps;
    meta.time_channel = tcfg.time_channel;
    save_checkpoint(file.string(), *net, meta);
  }
  return {net, tcfg.time_channel};
}

}  // namespace

std::vector<SweepCell> sensitivity_sweep(const SweepConfig& cfg) {
  cfg.validate();
  if (cfg.with_drl && cfg.train_missing && !cfg.checkpoint_dir.empty())
    fs::create_directories(cfg.checkpoint_dir);

  struct Job {
    double v, d;
  };
  std::vector<Job> jobs;
  for (double v : cfg.v_values)
    for (double d : cfg.d_values) jobs.push_back({v, d});
  std::vector<SweepCell> cells(jobs.size());

  auto run_cell = [&](size_t j) {
    const Job& job = jobs[j];
    EnvParams p = cfg.base;
    p.wind_speed = job.v;
    p.diffusivity = job.d;
    Environment env(p);

    SweepCell cell;
    cell.wind_speed = job.v;
    cell.diffusivity = job.d;
    cell.infotaxis = eval_policy(env, infotaxis_policy(), cfg);
    if (cfg.with_drl) {
      auto [net, time_channel] = cell_network(env, cfg, job.v, job.d, cell);
      cell.drl = eval_policy(env, drl_policy(net, time_channel), cfg);
    }
    cells[j] = std::move(cell);
  };

  const int n_workers =
      static_cast<int>(std::min<size_t>(static_cast<size_t>(cfg.cell_threads), jobs.size()));
  if (n_workers <= 1) {
    for (size_t j = 0; j < jobs.size(); ++j) run_cell(j);
    return cells;
  }

  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        size_t j = next.fetch_add(1);
        if (j >= jobs.size()) return;
        try {
          run_cell(j);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return cells;
}

}  // namespace ste
