#include "ste/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "net_json.hpp"
#include "ste/errors.hpp"

namespace ste {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "plume-ste-checkpoint";
constexpr int kFormatVersion = 1;

void require(bool ok, const std::string& msg) {
  if (!ok) throw CheckpointError(msg);
}

json vector_to_json(const std::vector<double>& v) { return json(v); }

std::vector<double> vector_from_json(const json& j, size_t want,
                                     const std::string& where) {
  require(j.is_array(), where + ": expected an array");
  require(j.size() == want, where + ": expected " + std::to_string(want) +
                                " values, got " + std::to_string(j.size()));
  std::vector<double> out(want);
  for (size_t i = 0; i < want; ++i) {
    const json& x = j[i];
    require(x.is_number(), where + ": non-numeric entry");
    out[i] = x.get<double>();
  }
  return out;
}

}  // namespace

json network_to_json(const Network& net) {
  json layers = json::array();
  for (const ConvLayer& c : net.conv) {
    layers.push_back({{"type", "conv"},
                      {"in_channels", c.in_c},
                      {"out_channels", c.out_c},
                      {"kernel", c.kernel},
                      {"weights", vector_to_json(c.w)},
                      {"bias", vector_to_json(c.b)}});
  }
  for (const DenseLayer& d : net.dense) {
    layers.push_back({{"type", "dense"},
                      {"in", d.in},
                      {"out", d.out},
                      {"weights", vector_to_json(d.w)},
                      {"bias", vector_to_json(d.b)}});
  }
  return json{{"architecture", to_string(net.kind)},
              {"input_geometry",
               {{"width", net.input.width},
                {"height", net.input.height},
                {"channels", net.input.channels}}},
              {"layers", layers}};
}

Network network_from_json(const json& j) {
  require(j.is_object(), "network: expected an object");
  Network net;
  try {
    net.kind = arch_from_string(j.at("architecture").get<std::string>());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("network: ") + e.what());
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("network: architecture: ") + e.what());
  }
  const json& geo = j.contains("input_geometry") ? j.at("input_geometry") : json();
  require(geo.is_object(), "network: missing input_geometry");
  try {
    net.input.width = geo.at("width").get<int>();
    net.input.height = geo.at("height").get<int>();
    net.input.channels = geo.at("channels").get<int>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("network: input_geometry: ") + e.what());
  }
  require(net.input.width > 0 && net.input.height > 0 && net.input.channels > 0,
          "network: input_geometry must be positive");
  require(net.input.size() <= 1 << 24, "network: input_geometry is implausibly large");

  require(j.contains("layers") && j.at("layers").is_array(),
          "network: missing layers array");
  bool seen_dense = false;
  int index = 0;
  for (const json& layer : j.at("layers")) {
    const std::string where = "layer " + std::to_string(index++);
    require(layer.is_object() && layer.contains("type"), where + ": missing type");
    const std::string type = layer.at("type").get<std::string>();
    try {
      if (type == "conv") {
        require(!seen_dense, where + ": conv after dense");
        ConvLayer c;
        c.in_c = layer.at("in_channels").get<int>();
        c.out_c = layer.at("out_channels").get<int>();
        c.kernel = layer.at("kernel").get<int>();
        require(c.in_c > 0 && c.out_c > 0 && c.kernel > 0, where + ": bad shape");
        c.w = vector_from_json(layer.at("weights"),
                               size_t(c.kernel) * c.kernel * c.in_c * c.out_c,
                               where + ": weights");
        c.b = vector_from_json(layer.at("bias"), size_t(c.out_c), where + ": bias");
        net.conv.push_back(std::move(c));
      } else if (type == "dense") {
        seen_dense = true;
        DenseLayer d;
        d.in = layer.at("in").get<int>();
        d.out = layer.at("out").get<int>();
        require(d.in > 0 && d.out > 0, where + ": bad shape");
        d.w = vector_from_json(layer.at("weights"), size_t(d.in) * d.out,
                               where + ": weights");
        d.b = vector_from_json(layer.at("bias"), size_t(d.out), where + ": bias");
        net.dense.push_back(std::move(d));
      } else {
        throw CheckpointError(where + ": unknown layer type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw CheckpointError(where + ": " + e.what());
    }
  }

  // The canonical constructor is the shape authority: whatever it builds for
  // this architecture and input is the only stack the forward pass accepts.
  Rng shape_rng(0);
  Network ref = Network::make(net.kind, net.input, shape_rng);
  require(ref.same_shape(net),
          std::string("network: layer stack does not match the ") +
              to_string(net.kind) + " architecture for this input geometry");
  require(net.all_finite(), "network: non-finite weight");
  return net;
}

json meta_to_json(const CheckpointMeta& meta) {
  return json{{"episodes", meta.episodes},
              {"seed", meta.seed},
              {"gradient_steps", meta.gradient_steps},
              {"time_channel", meta.time_channel}};
}

CheckpointMeta meta_from_json(const json& j) {
  require(j.is_object(), "training_meta: expected an object");
  CheckpointMeta meta;
  try {
    meta.episodes = j.at("episodes").get<long>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.gradient_steps = j.at("gradient_steps").get<long>();
    meta.time_channel = j.at("time_channel").get<bool>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("training_meta: ") + e.what());
  }
  require(meta.episodes >= 0 && meta.gradient_steps >= 0,
          "training_meta: negative counters");
  return meta;
}

void save_checkpoint(const std::string& path, const Network& net,
                     const CheckpointMeta& meta) {
  if (!net.all_finite()) throw CheckpointError("refusing to save non-finite weights");
  json j = network_to_json(net);
  j["format"] = kFormatTag;
  j["version"] = kFormatVersion;
  j["training_meta"] = meta_to_json(meta);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(1) << '\n';
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CheckpointError(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("format") ||
      j.at("format") != json(kFormatTag)) {
    throw CheckpointError(path + ": not a checkpoint file");
  }
  if (!j.contains("version") || j.at("version") != json(kFormatVersion)) {
    throw CheckpointError(path + ": unsupported checkpoint version");
  }
  LoadedCheckpoint loaded;
  loaded.net = network_from_json(j);
  loaded.meta = meta_from_json(j.contains("training_meta") ? j.at("training_meta")
                                                           : json());
  return loaded;
}

}  // namespace ste
