#ifndef STE_ERRORS_HPP
#define STE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ste {

// Invalid physical or run configuration (bad grid, lambda <= radius, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke an operation precondition (infeasible action, shape mismatch).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

// Acting past the episode horizon.
class EpisodeOver : public ContractViolation {
 public:
  explicit EpisodeOver(const std::string& msg) : ContractViolation(msg) {}
};

// Bayes update with zero evidence: the observation is impossible under the
// model, which signals a bug rather than a recoverable condition.
class UpdateError : public std::runtime_error {
 public:
  explicit UpdateError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable, truncated, or inconsistent checkpoint file.
class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite loss or gradient during training.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& msg, int episode)
      : std::runtime_error(msg), episode(episode) {}
  int episode;
};

// Exhaustive search tree would exceed the tractability guard.
class OracleGuardError : public std::runtime_error {
 public:
  explicit OracleGuardError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ste

#endif
