#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <string>

#include "ste/errors.hpp"
#include "ste/sweep.hpp"

using namespace ste;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ste_sweep_test_" + std::to_string(getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SweepConfig tiny_sweep(const std::string& dir) {
  SweepConfig cfg;
  cfg.v_values = {0.0, 1.0};
  cfg.d_values = {1.0};
  cfg.base.nx = 5;
  cfg.base.ny = 5;
  cfg.base.fluxes = {1.0, 2.0};
  cfg.base.h_max = 5;
  cfg.episodes = 20;
  cfg.horizon = 8;
  cfg.seed = 4;
  cfg.checkpoint_dir = dir;
  cfg.train.arch = ArchKind::fc;
  cfg.train.episodes = 6;
  cfg.train.horizon = 8;
  cfg.train.batch_size = 8;
  cfg.train.learning_rate = 1e-2;
  cfg.train.replay_capacity = 32;
  cfg.train.target_sync_interval = 10;
  cfg.train.seed = 3;
  return cfg;
}

bool same_metrics(const PolicyMetrics& a, const PolicyMetrics& b) {
  return a.success_rate == b.success_rate &&
         a.mean_cumulative_entropy == b.mean_cumulative_entropy &&
         a.mean_final_entropy == b.mean_final_entropy &&
         a.rel_drps_x.p75 == b.rel_drps_x.p75 &&
         a.success_by_flux == b.success_by_flux;
}

}  // namespace

TEST_CASE("cell files are named by architecture and grid point") {
  CHECK(cell_checkpoint_name(ArchKind::fc, 0.0, 1.0) == "fc_V0_D1.json");
  CHECK(cell_checkpoint_name(ArchKind::cnn, 2.0, 1.5) == "cnn_V2_D1.5.json");
}

TEST_CASE("a sweep trains each cell once and reloads it afterwards") {
  TempDir tmp;
  SweepConfig cfg = tiny_sweep(tmp.path.string());

  const auto first = sensitivity_sweep(cfg);
  REQUIRE(first.size() == 2);
  CHECK(first[0].wind_speed == 0.0);
  CHECK(first[1].wind_speed == 1.0);
  for (const auto& cell : first) {
    CHECK(cell.diffusivity == 1.0);
    CHECK(cell.infotaxis.episodes == cfg.episodes);
    REQUIRE(cell.drl.has_value());
    CHECK(cell.drl->episodes == cfg.episodes);
    CHECK(cell.train_episodes == cfg.train.episodes);
    CHECK(fs::exists(tmp.path / cell_checkpoint_name(ArchKind::fc, cell.wind_speed,
                                                     cell.diffusivity)));
  }

  // Second run finds the files, trains nothing, and reproduces every number.
  cfg.train_missing = false;
  const auto second = sensitivity_sweep(cfg);
  REQUIRE(second.size() == first.size());
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(second[i].train_episodes == 0);
    CHECK(same_metrics(second[i].infotaxis, first[i].infotaxis));
    CHECK(same_metrics(*second[i].drl, *first[i].drl));
  }

  // Concurrent cells reduce to the same numbers as the serial pass.
  cfg.cell_threads = 2;
  const auto parallel = sensitivity_sweep(cfg);
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(same_metrics(parallel[i].infotaxis, first[i].infotaxis));
    CHECK(same_metrics(*parallel[i].drl, *first[i].drl));
  }
}

TEST_CASE("a missing cell is an error when training is disabled") {
  TempDir tmp;
  SweepConfig cfg = tiny_sweep(tmp.path.string());
  cfg.train_missing = false;
  CHECK_THROWS_AS(sensitivity_sweep(cfg), ConfigError);
}

TEST_CASE("the baseline-only sweep needs no checkpoints") {
  SweepConfig cfg = tiny_sweep("");
  cfg.with_drl = false;
  cfg.v_values = {1.0};
  const auto cells = sensitivity_sweep(cfg);
  REQUIRE(cells.size() == 1);
  CHECK_FALSE(cells[0].drl.has_value());
  CHECK(cells[0].infotaxis.episodes == cfg.episodes);
}

TEST_CASE("bad sweep configurations are rejected") {
  SweepConfig cfg = tiny_sweep("");
  cfg.v_values.clear();
  CHECK_THROWS_AS(sensitivity_sweep(cfg), ConfigError);

  cfg = tiny_sweep("");
  cfg.d_values = {0.0};  // diffusivity must stay positive
  CHECK_THROWS_AS(sensitivity_sweep(cfg), ConfigError);

  cfg = tiny_sweep("");
  cfg.episodes = 0;
  CHECK_THROWS_AS(sensitivity_sweep(cfg), ConfigError);
}
