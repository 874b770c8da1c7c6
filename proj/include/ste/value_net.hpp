#ifndef STE_VALUE_NET_HPP
#define STE_VALUE_NET_HPP

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "ste/env_params.hpp"
#include "ste/rng.hpp"

namespace ste {

enum class ArchKind { fc, cnn };
const char* to_string(ArchKind kind);
ArchKind arch_from_string(const std::string& name);

// Value-network input geometry: the egocentric belief tensor, plus an
// optional constant time-to-go channel.
struct InputGeometry {
  int width = 0;    // 2 nx - 1
  int height = 0;   // 2 ny - 1
  int channels = 0; // n_phi (+1 with the time channel)
  int size() const { return width * height * channels; }
  friend bool operator==(const InputGeometry&, const InputGeometry&) = default;
};
InputGeometry input_geometry(const EnvParams& params, bool time_channel = false);

// Dense weights are [out][in] row-major. Conv weights are stored in GEMM
// order [ky][kx][in_c][out_c] row-major, matching the im2col patch layout;
// activations are laid out height-major with channels fastest ([y][x][c]).
struct DenseLayer {
  int in = 0, out = 0;
  std::vector<double> w, b;
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};
struct ConvLayer {
  int in_c = 0, out_c = 0, kernel = 3;
  std::vector<double> w, b;
  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

// Scalar value function v(s, w). Two architectures:
//   fc:  flatten -> 3 x (dense 32, ReLU) -> dense 1
//   cnn: 4 x (conv 3x3/32, zero pad, ReLU) with 2x2 stride-2 average pooling
//        after the first two conv layers, then flatten -> dense 1
// Hidden layers are initialized uniformly scaled by 1/sqrt(fan-in); the
// output layer starts at exactly zero, so an untrained network values every
// state at 0.
struct Network {
  ArchKind kind = ArchKind::fc;
  InputGeometry input;
  std::vector<ConvLayer> conv;
  std::vector<DenseLayer> dense;

  static Network make(ArchKind kind, InputGeometry input, Rng& init_rng);

  size_t parameter_count() const;
  bool all_finite() const;
  bool same_shape(const Network& other) const;
  friend bool operator==(const Network&, const Network&) = default;
};

// Gradient or momentum buffers share the Network container shape.
Network zeros_like(const Network& net);

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Reusable per-thread scratch for batched evaluation.
struct NetWorkspace {
  std::vector<RowMat> act;  // post-activation per stage
  std::vector<RowMat> col;  // im2col patches per conv layer
  RowMat scratch[3];        // backward ping-pong and dcol buffers
};

// Batched calls process rows in fixed-size chunks so a rerun with the same
// inputs reduces in the same order regardless of total batch size.
inline constexpr int kNetChunk = 128;

// v(s, w) for each row of inputs. Deterministic and thread-safe given
// distinct workspaces.
Eigen::VectorXd forward_batch(const Network& net, const Eigen::Ref<const RowMat>& inputs,
                              NetWorkspace& ws, bool keep_intermediates = false);

// Single-sample forward; input length must match the architecture.
double forward(const Network& net, std::span<const double> input);

// Accumulates into grads the gradient of  mean_n 1/2 (v(x_n) - target_n)^2
// and returns  mean_n (v(x_n) - target_n)^2  (the Bellman residual form).
double loss_and_gradient(const Network& net, const Eigen::Ref<const RowMat>& inputs,
                         const Eigen::Ref<const Eigen::VectorXd>& targets,
                         Network& grads, NetWorkspace& ws);

// Gradient of 1/2 (v(x) - target)^2 for a single sample.
Network gradient(const Network& net, std::span<const double> input, double target);

struct TrainSample {
  std::vector<double> input;
  double target = 0.0;
};

// w <- w - lr * mean-over-batch gradient. Throws TrainingDiverged on a
// non-finite gradient.
Network sgd_step(const Network& net, std::span<const TrainSample> batch, double lr);

// In-place update with optional momentum; velocity may be null for plain SGD.
void sgd_apply(Network& net, const Network& grads, double lr, double momentum,
               Network* velocity);

}  // namespace ste

#endif
