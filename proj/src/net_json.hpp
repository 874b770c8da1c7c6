#ifndef STE_NET_JSON_HPP
#define STE_NET_JSON_HPP

// Internal JSON (de)serialization shared by checkpoint files and training
// resume state. Not part of the public headers.

#include "json.hpp"
#include "ste/checkpoint.hpp"
#include "ste/value_net.hpp"

namespace ste {

nlohmann::json network_to_json(const Network& net);

// Parses and validates a network: layer shapes must match what
// Network::make would build for the declared architecture and geometry,
// and every weight must be finite. Throws CheckpointError.
Network network_from_json(const nlohmann::json& j);

nlohmann::json meta_to_json(const CheckpointMeta& meta);
CheckpointMeta meta_from_json(const nlohmann::json& j);

}  // namespace ste

#endif
