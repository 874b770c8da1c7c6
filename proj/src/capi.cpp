#include "plume_ste.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "ste/errors.hpp"
#include "ste/runner.hpp"

namespace {

thread_local std::string g_last_error;

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

using RunFn = std::string (*)(const std::string&);

ste_status run(RunFn fn, const char* config_json, char** out_summary_json) {
  g_last_error.clear();
  if (!config_json || !out_summary_json) {
    g_last_error = "null argument";
    return STE_ERROR_INVALID;
  }
  try {
    const std::string summary = fn(config_json);
    char* copy = copy_out(summary);
    if (!copy) {
      g_last_error = "out of memory";
      return STE_ERROR_INTERNAL;
    }
    *out_summary_json = copy;
    return STE_OK;
  } catch (const ste::ConfigError& e) {
    g_last_error = e.what();
    return STE_ERROR_CONFIG;
  } catch (const ste::CheckpointError& e) {
    g_last_error = e.what();
    return STE_ERROR_CHECKPOINT;
  } catch (const ste::TrainingDiverged& e) {
    g_last_error = std::string(e.what()) + " (episode " +
                   std::to_string(e.episode) + ")";
    return STE_ERROR_DIVERGED;
  } catch (const ste::OracleGuardError& e) {
    g_last_error = e.what();
    return STE_ERROR_GUARD;
  } catch (const ste::IoError& e) {
    g_last_error = e.what();
    return STE_ERROR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return STE_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return STE_ERROR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* ste_version(void) { return "1.0.0"; }

const char* ste_last_error(void) { return g_last_error.c_str(); }

void ste_string_free(char* s) { std::free(s); }

ste_status ste_run_simulate(const char* config_json, char** out_summary_json) {
  return run(&ste::run_simulate, config_json, out_summary_json);
}

ste_status ste_run_train(const char* config_json, char** out_summary_json) {
  return run(&ste::run_train, config_json, out_summary_json);
}

ste_status ste_run_eval(const char* config_json, char** out_summary_json) {
  return run(&ste::run_eval, config_json, out_summary_json);
}

ste_status ste_run_sweep(const char* config_json, char** out_summary_json) {
  return run(&ste::run_sweep, config_json, out_summary_json);
}

ste_status ste_run_oracle(const char* config_json, char** out_summary_json) {
  return run(&ste::run_oracle, config_json, out_summary_json);
}

}  // extern "C"
