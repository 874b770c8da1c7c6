#ifndef STE_CHECKPOINT_HPP
#define STE_CHECKPOINT_HPP

#include <cstdint>
#include <string>

#include "ste/value_net.hpp"

namespace ste {

// Provenance carried alongside the weights.
struct CheckpointMeta {
  long episodes = 0;            // training episodes completed
  std::uint64_t seed = 0;       // master training seed
  long gradient_steps = 0;
  bool time_channel = false;    // input layout expected by the network
  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct LoadedCheckpoint {
  Network net;
  CheckpointMeta meta;
};

// JSON checkpoint with full-precision weights; numbers survive a save/load
// round trip bit for bit. Throws IoError when the file cannot be written or
// read, CheckpointError on malformed or inconsistent content (wrong format
// tag, shape mismatches, non-finite weights).
void save_checkpoint(const std::string& path, const Network& net,
                     const CheckpointMeta& meta);
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace ste

#endif
