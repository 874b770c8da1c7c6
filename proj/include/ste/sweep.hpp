#ifndef STE_SWEEP_HPP
#define STE_SWEEP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ste/env_params.hpp"
#include "ste/evaluation.hpp"
#include "ste/training.hpp"

namespace ste {

// Sensitivity grid over wind speed and diffusivity: each (V, D) cell gets its
// own environment, its own trained (or loaded) value network, and a fresh
// evaluation of both policies.
struct SweepConfig {
  std::vector<double> v_values = {0.0, 2.0};
  std::vector<double> d_values = {1.0, 2.0};
  EnvParams base;            // everything except wind_speed / diffusivity
  long episodes = 1000;      // evaluation episodes per cell
  int horizon = 20;
  std::uint64_t seed = 1;
  Mixture mixture = Mixture::uniform;

  bool with_drl = true;      // also evaluate a value-network policy per cell
  // Per-cell networks live in checkpoint_dir as <arch>_V<v>_D<d>.json. A
  // missing file is trained from the template below when train_missing is
  // set (and saved back when the dir is writable); otherwise it is an error.
  std::string checkpoint_dir;
  bool train_missing = true;
  TrainConfig train;

  int eval_threads = 1;      // threads inside each cell's evaluation
  int cell_threads = 1;      // cells processed concurrently

  void validate() const;  // throws ConfigError
};

struct SweepCell {
  double wind_speed = 0.0;
  double diffusivity = 0.0;
  PolicyMetrics infotaxis;
  std::optional<PolicyMetrics> drl;
  long train_episodes = 0;   // episodes behind the cell's network, 0 if loaded
};

// Cell file name, e.g. "fc_V0_D1.json".
std::string cell_checkpoint_name(ArchKind arch, double v, double d);

std::vector<SweepCell> sensitivity_sweep(const SweepConfig& cfg);

}  // namespace ste

#endif
