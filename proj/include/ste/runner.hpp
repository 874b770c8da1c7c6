#ifndef STE_RUNNER_HPP
#define STE_RUNNER_HPP

#include <string>

namespace ste {

// Command runners behind the shared-library and CLI boundary. Each takes one
// JSON configuration document (README documents the layout), writes the
// command's output files under the document's output_dir, and returns a JSON
// summary string. Every number derives from the document's seed, so a rerun
// with the same document reproduces the output files byte for byte.
//
// Errors surface as the library's typed exceptions: ConfigError for a
// malformed document or invalid values, CheckpointError / IoError for
// checkpoint and file trouble, TrainingDiverged and OracleGuardError from the
// respective commands.
std::string run_simulate(const std::string& config_json);
std::string run_train(const std::string& config_json);
std::string run_eval(const std::string& config_json);
std::string run_sweep(const std::string& config_json);
std::string run_oracle(const std::string& config_json);

}  // namespace ste

#endif
