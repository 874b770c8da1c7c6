// Command-line front end. All work happens behind the C interface in
// plume_ste.h; this file only assembles the configuration document (config
// file plus flag overrides), dispatches, and maps statuses to exit codes.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "plume_ste.h"

namespace {

using nlohmann::json;

int exit_code_for(ste_status s) {
  switch (s) {
    case STE_OK:
      return 0;
    case STE_ERROR_CHECKPOINT:
      return 2;
    case STE_ERROR_DIVERGED:
      return 3;
    case STE_ERROR_GUARD:
      return 4;
    default:
      return 1;  // config, io, and internal failures
  }
}

// One flag that may override a config key. CLI11 owns the parsed value; we
// only copy it into the document when the user actually passed the flag.
template <typename T>
struct Override {
  T value{};
  CLI::Option* opt = nullptr;

  void add(CLI::App* cmd, const std::string& flag, const std::string& help) {
    opt = cmd->add_option(flag, value, help);
  }
  void add_flag(CLI::App* cmd, const std::string& flag, const std::string& help) {
    opt = cmd->add_flag(flag, value, help);
  }
  bool given() const { return opt && opt->count() > 0; }
  void apply(json& doc, const char* block, const char* key) const {
    if (given()) doc[block][key] = value;
  }
  void apply(json& doc, const char* key) const {
    if (given()) doc[key] = value;
  }
};

struct GlobalFlags {
  Override<std::string> config_path;
  Override<std::string> output_dir;
  Override<std::uint64_t> seed;
  Override<int> threads;

  void add(CLI::App* cmd) {
    config_path.add(cmd, "--config", "JSON configuration file");
    output_dir.add(cmd, "--output-dir", "directory for output files");
    seed.add(cmd, "--seed", "master seed (default 1)");
    threads.add(cmd, "--threads",
                "worker threads; wall time only, never results "
                "(PLUME_STE_THREADS as fallback)");
  }

  // Loads the config file (if any) and applies the global overrides.
  json document() const {
    json doc = json::object();
    if (config_path.given()) {
      std::ifstream in(config_path.value);
      if (!in) {
        throw CLI::ValidationError("--config",
                                   "cannot open " + config_path.value);
      }
      std::stringstream buf;
      buf << in.rdbuf();
      try {
        doc = json::parse(buf.str());
      } catch (const json::exception& e) {
        throw CLI::ValidationError("--config", e.what());
      }
      if (!doc.is_object())
        throw CLI::ValidationError("--config", "document must be a JSON object");
    }
    output_dir.apply(doc, "output_dir");
    seed.apply(doc, "seed");
    threads.apply(doc, "threads");
    return doc;
  }
};

using RunFn = ste_status (*)(const char*, char**);

int dispatch(RunFn fn, const json& doc) {
  const std::string text = doc.dump();
  char* summary = nullptr;
  const ste_status status = fn(text.c_str(), &summary);
  if (status == STE_OK) {
    std::fputs(summary, stdout);
    ste_string_free(summary);
    return 0;
  }
  std::fprintf(stderr, "error: %s\n", ste_last_error());
  return exit_code_for(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plume-ste: source term estimation on a plume grid world — "
               "simulate, train, evaluate, and compare search policies"};
  app.require_subcommand(1);

  // simulate ----------------------------------------------------------------
  auto* simulate = app.add_subcommand(
      "simulate", "run single episodes and write their trajectories");
  GlobalFlags sim_global;
  sim_global.add(simulate);
  Override<std::string> sim_policy, sim_checkpoint;
  Override<long> sim_episodes;
  Override<int> sim_horizon;
  Override<bool> sim_emit_field;
  std::vector<double> sim_truth;
  sim_policy.add(simulate, "--policy", "infotaxis | random | checkpoint");
  sim_checkpoint.add(simulate, "--checkpoint", "value-network checkpoint file");
  sim_episodes.add(simulate, "--episodes", "episodes to simulate (default 1)");
  sim_horizon.add(simulate, "--horizon", "actions per episode (default 20)");
  CLI::Option* truth_opt =
      simulate->add_option("--truth", sim_truth, "fixed source as xs,ys,phi")
          ->delimiter(',')
          ->expected(3);
  sim_emit_field.add_flag(simulate, "--emit-field",
                          "also write the truth's mean hit map");

  // train ---------------------------------------------------------------
  auto* train = app.add_subcommand(
      "train", "fit a value network against the belief-MDP environment");
  GlobalFlags train_global;
  train_global.add(train);
  Override<std::string> train_arch;
  Override<long> train_episodes, train_ckpt_every;
  Override<int> train_horizon, train_batch, train_update_every;
  Override<double> train_lr;
  Override<bool> train_time_channel, train_resume;
  train_arch.add(train, "--arch", "network architecture: fc | cnn");
  train_episodes.add(train, "--episodes", "training episodes (default 20000)");
  train_horizon.add(train, "--horizon", "actions per episode (default 20)");
  train_batch.add(train, "--batch-size", "minibatch size (default 128)");
  train_lr.add(train, "--learning-rate", "SGD learning rate (default 1e-3)");
  train_update_every.add(train, "--update-every",
                         "environment steps per gradient step (default 1)");
  train_time_channel.add_flag(train, "--time-channel",
                              "append a time-to-go input channel");
  train_ckpt_every.add(train, "--checkpoint-every",
                       "episodes between periodic checkpoints (0 = off)");
  train_resume.add_flag(train, "--resume,!--no-resume",
                        "continue from the output directory's saved state "
                        "(default on)");

  // eval ----------------------------------------------------------------
  auto* eval = app.add_subcommand(
      "eval", "evaluate a policy over many episodes and write metrics");
  GlobalFlags eval_global;
  eval_global.add(eval);
  Override<std::string> eval_policy, eval_checkpoint;
  Override<long> eval_episodes;
  Override<int> eval_horizon;
  Override<bool> eval_per_flux;
  eval_policy.add(eval, "--policy", "infotaxis | random | checkpoint");
  eval_checkpoint.add(eval, "--checkpoint", "value-network checkpoint file");
  eval_episodes.add(eval, "--episodes", "evaluation episodes (default 5000)");
  eval_horizon.add(eval, "--horizon", "actions per episode (default 20)");
  eval_per_flux.add_flag(eval, "--per-flux",
                         "stratify the episode budget equally across fluxes");

  // sweep ---------------------------------------------------------------
  auto* sweep = app.add_subcommand(
      "sweep", "evaluate policies over a wind-speed x diffusivity grid");
  GlobalFlags sweep_global;
  sweep_global.add(sweep);
  Override<long> sweep_episodes, sweep_train_episodes;
  Override<int> sweep_cell_threads;
  Override<std::string> sweep_ckpt_dir, sweep_arch;
  Override<bool> sweep_with_drl, sweep_train_missing;
  sweep_episodes.add(sweep, "--episodes",
                     "evaluation episodes per cell (default 1000)");
  sweep_cell_threads.add(sweep, "--cell-threads",
                         "cells processed concurrently (default 1)");
  sweep_ckpt_dir.add(sweep, "--checkpoint-dir",
                     "directory holding per-cell networks "
                     "(default <output_dir>/cells)");
  sweep_with_drl.add_flag(sweep, "--with-drl,!--no-drl",
                          "also evaluate a trained network per cell "
                          "(default on)");
  sweep_train_missing.add_flag(sweep, "--train-missing,!--no-train-missing",
                               "train cells whose checkpoint is absent "
                               "(default on)");
  sweep_arch.add(sweep, "--arch", "architecture for per-cell training");
  sweep_train_episodes.add(sweep, "--train-episodes",
                           "training episodes per missing cell");

  // oracle --------------------------------------------------------------
  auto* oracle = app.add_subcommand(
      "oracle", "exhaustive small-instance optimum vs the greedy policies");
  GlobalFlags oracle_global;
  oracle_global.add(oracle);
  Override<int> oracle_states, oracle_horizon;
  Override<double> oracle_max_nodes;
  Override<std::string> oracle_checkpoint;
  oracle_states.add(oracle, "--states", "random belief states (default 100)");
  oracle_horizon.add(oracle, "--horizon", "look-ahead depth (default 1)");
  oracle_max_nodes.add(oracle, "--max-nodes",
                       "tractability guard on tree leaves (default 1e6)");
  oracle_checkpoint.add(oracle, "--checkpoint",
                        "also report a value network's agreement");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version succeed, parse trouble is config
  }

  try {
    if (simulate->parsed()) {
      json doc = sim_global.document();
      sim_policy.apply(doc, "simulate", "policy");
      sim_checkpoint.apply(doc, "simulate", "checkpoint");
      sim_episodes.apply(doc, "simulate", "episodes");
      sim_horizon.apply(doc, "simulate", "horizon");
      sim_emit_field.apply(doc, "simulate", "emit_field");
      if (truth_opt->count() > 0) {
        const int xs = static_cast<int>(sim_truth[0]);
        const int ys = static_cast<int>(sim_truth[1]);
        if (xs != sim_truth[0] || ys != sim_truth[1])
          throw CLI::ValidationError("--truth", "xs and ys must be integers");
        doc["simulate"]["truth"] = {xs, ys, sim_truth[2]};
      }
      return dispatch(&ste_run_simulate, doc);
    }
    if (train->parsed()) {
      json doc = train_global.document();
      train_arch.apply(doc, "train", "arch");
      train_episodes.apply(doc, "train", "episodes");
      train_horizon.apply(doc, "train", "horizon");
      train_batch.apply(doc, "train", "batch_size");
      train_lr.apply(doc, "train", "learning_rate");
      train_update_every.apply(doc, "train", "update_every");
      train_time_channel.apply(doc, "train", "time_channel");
      train_ckpt_every.apply(doc, "train", "checkpoint_every");
      train_resume.apply(doc, "train", "resume");
      return dispatch(&ste_run_train, doc);
    }
    if (eval->parsed()) {
      json doc = eval_global.document();
      eval_policy.apply(doc, "evaluate", "policy");
      eval_checkpoint.apply(doc, "evaluate", "checkpoint");
      eval_episodes.apply(doc, "evaluate", "episodes");
      eval_horizon.apply(doc, "evaluate", "horizon");
      eval_per_flux.apply(doc, "evaluate", "per_flux");
      return dispatch(&ste_run_eval, doc);
    }
    if (sweep->parsed()) {
      json doc = sweep_global.document();
      sweep_episodes.apply(doc, "sweep", "episodes");
      sweep_cell_threads.apply(doc, "sweep", "cell_threads");
      sweep_ckpt_dir.apply(doc, "sweep", "checkpoint_dir");
      sweep_with_drl.apply(doc, "sweep", "with_drl");
      sweep_train_missing.apply(doc, "sweep", "train_missing");
      sweep_arch.apply(doc, "train", "arch");
      sweep_train_episodes.apply(doc, "train", "episodes");
      return dispatch(&ste_run_sweep, doc);
    }
    if (oracle->parsed()) {
      json doc = oracle_global.document();
      oracle_states.apply(doc, "oracle", "states");
      oracle_horizon.apply(doc, "oracle", "horizon");
      oracle_max_nodes.apply(doc, "oracle", "max_nodes");
      oracle_checkpoint.apply(doc, "oracle", "checkpoint");
      return dispatch(&ste_run_oracle, doc);
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
