#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "plume_ste.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ste_capi_test_" + std::to_string(getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

json tiny_env() {
  return json{{"nx", 5},      {"ny", 5},   {"fluxes", {1.0, 2.0}},
              {"wind_speed", 2.0},          {"diffusivity", 2.0},
              {"lifetime", 1e7},            {"radius", 0.5},
              {"dt", 2.0},                  {"h_max", 3},
              {"self_distance", 0.2}};
}

// Runs one of the entry points and hands back (status, summary-or-error).
struct RunResult {
  ste_status status;
  std::string text;
};

RunResult run(ste_status (*fn)(const char*, char**), const json& cfg) {
  char* out = nullptr;
  ste_status st = fn(cfg.dump().c_str(), &out);
  RunResult r{st, {}};
  if (out != nullptr) {
    r.text = out;
    ste_string_free(out);
  } else {
    r.text = ste_last_error();
  }
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("version string") {
  CHECK(std::string(ste_version()) == "1.0.0");
}

TEST_CASE("null arguments are rejected") {
  char* out = nullptr;
  CHECK(ste_run_simulate(nullptr, &out) == STE_ERROR_INVALID);
  CHECK(out == nullptr);
  CHECK(std::string(ste_last_error()).find("null") != std::string::npos);
  CHECK(ste_run_eval("{}", nullptr) == STE_ERROR_INVALID);
}

TEST_CASE("malformed and unknown configuration") {
  char* out = nullptr;
  CHECK(ste_run_eval("{not json", &out) == STE_ERROR_CONFIG);
  CHECK(out == nullptr);
  CHECK(std::string(ste_last_error()).size() > 0);

  json cfg{{"environment", tiny_env()}, {"no_such_block", 1}};
  CHECK(run(ste_run_eval, cfg).status == STE_ERROR_CONFIG);
  cfg = json{{"environment", tiny_env()},
             {"evaluate", {{"episodes", "many"}}}};
  RunResult r = run(ste_run_eval, cfg);
  CHECK(r.status == STE_ERROR_CONFIG);
  CHECK(r.text.find("episodes") != std::string::npos);
}

TEST_CASE("simulate returns a summary and reruns byte-identically") {
  TempDir tmp;
  json cfg{{"seed", 7},
           {"output_dir", (tmp.path / "sim").string()},
           {"environment", tiny_env()},
           {"simulate",
            {{"policy", "infotaxis"}, {"episodes", 2}, {"horizon", 6}}}};
  RunResult first = run(ste_run_simulate, cfg);
  REQUIRE(first.status == STE_OK);
  json summary = json::parse(first.text);
  CHECK(summary.at("seed") == 7);
  CHECK(summary.at("config").get<std::string>().size() == 16);
  CHECK(summary.at("episodes").size() == 2);

  std::string traj = slurp(tmp.path / "sim" / "trajectory_0.csv");
  CHECK(traj.rfind("# config=", 0) == 0);

  cfg["threads"] = 3;  // wall time only; files and summary stay put
  RunResult second = run(ste_run_simulate, cfg);
  REQUIRE(second.status == STE_OK);
  CHECK(first.text == second.text);
  CHECK(slurp(tmp.path / "sim" / "trajectory_0.csv") == traj);
}

TEST_CASE("missing checkpoint reports a checkpoint error") {
  TempDir tmp;
  json cfg{{"output_dir", (tmp.path / "ev").string()},
           {"environment", tiny_env()},
           {"evaluate",
            {{"policy", "checkpoint"},
             {"checkpoint", (tmp.path / "nope.json").string()},
             {"episodes", 2},
             {"horizon", 4}}}};
  RunResult r = run(ste_run_eval, cfg);
  CHECK(r.status == STE_ERROR_CHECKPOINT);
  CHECK(r.text.find("nope.json") != std::string::npos);
}

TEST_CASE("training divergence is reported with the episode") {
  TempDir tmp;
  json cfg{{"output_dir", (tmp.path / "tr").string()},
           {"environment", tiny_env()},
           {"train",
            {{"arch", "fc"},
             {"episodes", 4},
             {"horizon", 4},
             {"learning_rate", 1e6}}}};
  RunResult r = run(ste_run_train, cfg);
  CHECK(r.status == STE_ERROR_DIVERGED);
  CHECK(r.text.find("episode") != std::string::npos);
}

TEST_CASE("search budget guard") {
  TempDir tmp;
  json cfg{{"output_dir", (tmp.path / "orc").string()},
           {"environment", tiny_env()},
           {"oracle", {{"states", 1}, {"horizon", 1}, {"max_nodes", 3.0}}}};
  CHECK(run(ste_run_oracle, cfg).status == STE_ERROR_GUARD);
}

TEST_CASE("unwritable output directory reports an io error") {
  TempDir tmp;
  std::ofstream(tmp.path / "file") << "x";
  json cfg{{"output_dir", (tmp.path / "file" / "out").string()},
           {"environment", tiny_env()},
           {"evaluate", {{"episodes", 2}, {"horizon", 4}}}};
  CHECK(run(ste_run_eval, cfg).status == STE_ERROR_IO);
}
