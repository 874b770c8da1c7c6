#include "ste/value_net.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ste/errors.hpp"

namespace ste {

namespace {

using Eigen::VectorXd;
using ConstMat = Eigen::Map<const RowMat>;
using MutMat = Eigen::Map<RowMat>;

constexpr int kHidden = 32;
constexpr int kConvFilters = 32;
constexpr int kConvLayers = 4;

// Spatial dims entering each conv layer; 2x2 stride-2 average pooling runs
// after the first two conv layers, truncating odd dims.
struct ConvStage {
  int h = 0, w = 0, c = 0;
  bool pool_after = false;
};

struct CnnPlan {
  ConvStage stage[kConvLayers];
  int flat = 0;  // flatten width feeding the linear head
};

CnnPlan plan_cnn(const InputGeometry& g) {
  CnnPlan p;
  int h = g.height, w = g.width, c = g.channels;
  for (int i = 0; i < kConvLayers; ++i) {
    if (h < 1 || w < 1)
      throw ConfigError("cnn input collapses to zero size after pooling");
    p.stage[i] = {h, w, c, i < 2};
    c = kConvFilters;
    if (p.stage[i].pool_after) {
      h /= 2;
      w /= 2;
    }
  }
  p.flat = h * w * c;
  if (p.flat < 1) throw ConfigError("cnn input collapses to zero size after pooling");
  return p;
}

double uniform_signed(Rng& rng, double bound) {
  return (2.0 * rng.uniform() - 1.0) * bound;
}

// Feature maps live in pixel-major matrices: row = sample * H * W + y * W + x,
// column = channel. im2col with 3x3 kernel, zero padding 1, stride 1.
void im2col(const Eigen::Ref<const RowMat>& fm, int n, int h, int w, int c,
            RowMat& col) {
  const int k = 3, patch = k * k * c;
  col.setZero(static_cast<Eigen::Index>(n) * h * w, patch);
  for (int s = 0; s < n; ++s) {
    const Eigen::Index base = static_cast<Eigen::Index>(s) * h * w;
    for (int y = 0; y < h; ++y) {
      for (int ky = 0; ky < k; ++ky) {
        const int iy = y + ky - 1;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int x0 = kx == 0 ? 1 : 0;
          const int x1 = kx == 2 ? w - 1 : w;
          const double* src = fm.data() + (base + static_cast<Eigen::Index>(iy) * w + x0 + kx - 1) * c;
          double* dst = col.data() + (base + static_cast<Eigen::Index>(y) * w + x0) * patch +
                        (ky * k + kx) * c;
          for (int x = x0; x < x1; ++x, src += c, dst += patch)
            std::memcpy(dst, src, sizeof(double) * c);
        }
      }
    }
  }
}

// Scatter-add of the column gradient back onto the feature-map gradient.
void col2im_add(const RowMat& dcol, int n, int h, int w, int c, RowMat& dfm) {
  const int k = 3, patch = k * k * c;
  dfm.setZero(static_cast<Eigen::Index>(n) * h * w, c);
  for (int s = 0; s < n; ++s) {
    const Eigen::Index base = static_cast<Eigen::Index>(s) * h * w;
    for (int y = 0; y < h; ++y) {
      for (int ky = 0; ky < k; ++ky) {
        const int iy = y + ky - 1;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int x0 = kx == 0 ? 1 : 0;
          const int x1 = kx == 2 ? w - 1 : w;
          double* dst = dfm.data() + (base + static_cast<Eigen::Index>(iy) * w + x0 + kx - 1) * c;
          const double* src = dcol.data() +
                              (base + static_cast<Eigen::Index>(y) * w + x0) * patch +
                              (ky * k + kx) * c;
          for (int x = x0; x < x1; ++x, src += patch, dst += c)
            for (int j = 0; j < c; ++j) dst[j] += src[j];
        }
      }
    }
  }
}

void avg_pool(const RowMat& fm, int n, int h, int w, int c, RowMat& out) {
  const int hp = h / 2, wp = w / 2;
  out.resize(static_cast<Eigen::Index>(n) * hp * wp, c);
  for (int s = 0; s < n; ++s) {
    const Eigen::Index bi = static_cast<Eigen::Index>(s) * h * w;
    const Eigen::Index bo = static_cast<Eigen::Index>(s) * hp * wp;
    for (int oy = 0; oy < hp; ++oy)
      for (int ox = 0; ox < wp; ++ox) {
        const Eigen::Index r = bi + static_cast<Eigen::Index>(2 * oy) * w + 2 * ox;
        out.row(bo + static_cast<Eigen::Index>(oy) * wp + ox) =
            0.25 * (fm.row(r) + fm.row(r + 1) + fm.row(r + w) + fm.row(r + w + 1));
      }
  }
}

void avg_pool_backward(const RowMat& dout, int n, int h, int w, int c, RowMat& dfm) {
  const int hp = h / 2, wp = w / 2;
  dfm.setZero(static_cast<Eigen::Index>(n) * h * w, c);
  for (int s = 0; s < n; ++s) {
    const Eigen::Index bi = static_cast<Eigen::Index>(s) * h * w;
    const Eigen::Index bo = static_cast<Eigen::Index>(s) * hp * wp;
    for (int oy = 0; oy < hp; ++oy)
      for (int ox = 0; ox < wp; ++ox) {
        const Eigen::Index r = bi + static_cast<Eigen::Index>(2 * oy) * w + 2 * ox;
        const auto g = 0.25 * dout.row(bo + static_cast<Eigen::Index>(oy) * wp + ox);
        dfm.row(r) = g;
        dfm.row(r + 1) = g;
        dfm.row(r + w) = g;
        dfm.row(r + w + 1) = g;
      }
  }
}

void relu_inplace(RowMat& m) { m = m.cwiseMax(0.0); }

// dA <- dA masked by A > 0. Post-activations determine the mask since
// relu(z) > 0 iff z > 0.
void relu_backward_inplace(RowMat& da, const RowMat& a) {
  da.array() *= (a.array() > 0.0).cast<double>();
}

// Forward for up to kNetChunk rows. Activations land in ws.act / ws.col when
// the caller needs a backward pass.
VectorXd forward_chunk(const Network& net, const Eigen::Ref<const RowMat>& x,
                       NetWorkspace& ws) {
  const Eigen::Index n = x.rows();
  if (net.kind == ArchKind::fc) {
    ws.act.resize(net.dense.size() - 1);
    const RowMat* cur = nullptr;
    for (size_t i = 0; i + 1 < net.dense.size(); ++i) {
      const DenseLayer& l = net.dense[i];
      ConstMat w(l.w.data(), l.out, l.in);
      RowMat& a = ws.act[i];
      if (i == 0)
        a.noalias() = x * w.transpose();
      else
        a.noalias() = *cur * w.transpose();
      a.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(l.b.data(), l.out);
      relu_inplace(a);
      cur = &a;
    }
    const DenseLayer& l = net.dense.back();
    ConstMat w(l.w.data(), l.out, l.in);
    VectorXd v = (*cur * w.transpose()).col(0);
    v.array() += l.b[0];
    return v;
  }

  if (x.outerStride() != x.cols())
    throw ContractViolation("cnn forward requires contiguous input rows");
  const CnnPlan plan = plan_cnn(net.input);
  ws.act.resize(6);
  ws.col.resize(kConvLayers);
  int act_idx = 0;
  const RowMat* cur = nullptr;
  Eigen::Map<const RowMat> x_pix(x.data(), n * net.input.height * net.input.width,
                                 net.input.channels);
  for (int i = 0; i < kConvLayers; ++i) {
    const ConvStage& st = plan.stage[i];
    const ConvLayer& l = net.conv[i];
    im2col(i == 0 ? Eigen::Ref<const RowMat>(x_pix) : Eigen::Ref<const RowMat>(*cur),
           static_cast<int>(n), st.h, st.w, st.c, ws.col[i]);
    ConstMat w(l.w.data(), 9 * l.in_c, l.out_c);
    RowMat& a = ws.act[act_idx];
    a.noalias() = ws.col[i] * w;
    a.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(l.b.data(), l.out_c);
    relu_inplace(a);
    cur = &a;
    ++act_idx;
    if (st.pool_after) {
      RowMat& p = ws.act[act_idx];
      avg_pool(*cur, static_cast<int>(n), st.h, st.w, l.out_c, p);
      cur = &p;
      ++act_idx;
    }
  }
  // Pixel-major (n*hw) x c is already the per-sample [y][x][c] flatten.
  Eigen::Map<const RowMat> flat(cur->data(), n, plan.flat);
  const DenseLayer& head = net.dense[0];
  ConstMat w(head.w.data(), head.out, head.in);
  VectorXd v = (flat * w.transpose()).col(0);
  v.array() += head.b[0];
  return v;
}

// Bias gradients summed in fixed row order. Eigen's redux picks its packet
// split from buffer alignment, which varies run to run for plain vectors and
// would make training depend on heap layout by a few ulps.
void add_rows_to(const RowMat& m, double* dst) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double* row = m.data() + i * m.cols();
    for (Eigen::Index j = 0; j < m.cols(); ++j) dst[j] += row[j];
  }
}

double ordered_sum(const VectorXd& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i);
  return s;
}

// Accumulates sum_n dv[n] * grad_w v(x_n) into grads; forward_chunk must have
// just run on x with the same workspace.
void backward_chunk(const Network& net, const Eigen::Ref<const RowMat>& x,
                    const VectorXd& dv, NetWorkspace& ws, Network& grads) {
  const Eigen::Index n = x.rows();
  if (net.kind == ArchKind::fc) {
    const DenseLayer& out = net.dense.back();
    const RowMat& last = ws.act.back();
    MutMat(grads.dense.back().w.data(), out.out, out.in).noalias() +=
        dv.transpose() * last;
    grads.dense.back().b[0] += ordered_sum(dv);
    RowMat& d = ws.scratch[0];
    d.noalias() = dv * ConstMat(out.w.data(), out.out, out.in);
    for (size_t i = net.dense.size() - 1; i-- > 0;) {
      const DenseLayer& l = net.dense[i];
      relu_backward_inplace(d, ws.act[i]);
      const auto& below = i == 0 ? x : Eigen::Ref<const RowMat>(ws.act[i - 1]);
      MutMat(grads.dense[i].w.data(), l.out, l.in).noalias() += d.transpose() * below;
      add_rows_to(d, grads.dense[i].b.data());
      if (i > 0) {
        ws.scratch[1].noalias() = d * ConstMat(l.w.data(), l.out, l.in);
        std::swap(ws.scratch[0], ws.scratch[1]);
      }
    }
    return;
  }

  const CnnPlan plan = plan_cnn(net.input);
  const DenseLayer& head = net.dense[0];
  Eigen::Map<const RowMat> flat(ws.act[5].data(), n, plan.flat);
  MutMat(grads.dense[0].w.data(), head.out, head.in).noalias() += dv.transpose() * flat;
  grads.dense[0].b[0] += ordered_sum(dv);

  RowMat& d = ws.scratch[0];  // gradient w.r.t. the current post-activation
  {
    RowMat dflat = dv * ConstMat(head.w.data(), head.out, head.in);
    d = Eigen::Map<const RowMat>(dflat.data(), n * plan.stage[3].h * plan.stage[3].w,
                                 kConvFilters);
  }
  int act_idx = 5;
  for (int i = kConvLayers; i-- > 0;) {
    const ConvStage& st = plan.stage[i];
    const ConvLayer& l = net.conv[i];
    if (st.pool_after) {
      // d currently holds the pooled-output gradient.
      avg_pool_backward(d, static_cast<int>(n), st.h, st.w, l.out_c, ws.scratch[1]);
      std::swap(ws.scratch[0], ws.scratch[1]);
      --act_idx;
    }
    relu_backward_inplace(d, ws.act[act_idx]);
    --act_idx;
    MutMat(grads.conv[i].w.data(), 9 * l.in_c, l.out_c).noalias() +=
        ws.col[i].transpose() * d;
    add_rows_to(d, grads.conv[i].b.data());
    if (i > 0) {
      ConstMat w(l.w.data(), 9 * l.in_c, l.out_c);
      ws.scratch[2].noalias() = d * w.transpose();
      col2im_add(ws.scratch[2], static_cast<int>(n), st.h, st.w, st.c, ws.scratch[1]);
      std::swap(ws.scratch[0], ws.scratch[1]);
    }
  }
}

void apply_array(std::vector<double>& w, const std::vector<double>& g, double lr,
                 double momentum, std::vector<double>* vel) {
  if (momentum > 0.0 && vel) {
    for (size_t i = 0; i < w.size(); ++i) {
      (*vel)[i] = momentum * (*vel)[i] + g[i];
      w[i] -= lr * (*vel)[i];
    }
  } else {
    for (size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
  }
}

}  // namespace

const char* to_string(ArchKind kind) { return kind == ArchKind::fc ? "fc" : "cnn"; }

ArchKind arch_from_string(const std::string& name) {
  if (name == "fc") return ArchKind::fc;
  if (name == "cnn") return ArchKind::cnn;
  throw ConfigError("unknown architecture '" + name + "' (expected fc or cnn)");
}

InputGeometry input_geometry(const EnvParams& params, bool time_channel) {
  return InputGeometry{2 * params.nx - 1, 2 * params.ny - 1,
                       params.n_fluxes() + (time_channel ? 1 : 0)};
}

Network Network::make(ArchKind kind, InputGeometry input, Rng& init_rng) {
  if (input.size() < 1) throw ConfigError("value network input has zero size");
  Network net;
  net.kind = kind;
  net.input = input;
  auto init_dense = [&](int in, int out, bool zero) {
    DenseLayer l;
    l.in = in;
    l.out = out;
    l.w.resize(static_cast<size_t>(in) * out);
    l.b.assign(static_cast<size_t>(out), 0.0);
    if (!zero) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      for (double& v : l.w) v = uniform_signed(init_rng, bound);
    } else {
      std::fill(l.w.begin(), l.w.end(), 0.0);
    }
    net.dense.push_back(std::move(l));
  };
  if (kind == ArchKind::fc) {
    init_dense(input.size(), kHidden, false);
    init_dense(kHidden, kHidden, false);
    init_dense(kHidden, kHidden, false);
    init_dense(kHidden, 1, true);
    return net;
  }
  const CnnPlan plan = plan_cnn(input);
  for (int i = 0; i < kConvLayers; ++i) {
    ConvLayer l;
    l.in_c = plan.stage[i].c;
    l.out_c = kConvFilters;
    l.w.resize(static_cast<size_t>(9) * l.in_c * l.out_c);
    l.b.assign(static_cast<size_t>(l.out_c), 0.0);
    const double bound = 1.0 / std::sqrt(9.0 * l.in_c);
    for (double& v : l.w) v = uniform_signed(init_rng, bound);
    net.conv.push_back(std::move(l));
  }
  init_dense(plan.flat, 1, true);
  return net;
}

size_t Network::parameter_count() const {
  size_t total = 0;
  for (const ConvLayer& l : conv) total += l.w.size() + l.b.size();
  for (const DenseLayer& l : dense) total += l.w.size() + l.b.size();
  return total;
}

bool Network::all_finite() const {
  auto ok = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  for (const ConvLayer& l : conv)
    if (!ok(l.w) || !ok(l.b)) return false;
  for (const DenseLayer& l : dense)
    if (!ok(l.w) || !ok(l.b)) return false;
  return true;
}

bool Network::same_shape(const Network& other) const {
  if (kind != other.kind || !(input == other.input)) return false;
  if (conv.size() != other.conv.size() || dense.size() != other.dense.size())
    return false;
  for (size_t i = 0; i < conv.size(); ++i)
    if (conv[i].in_c != other.conv[i].in_c || conv[i].out_c != other.conv[i].out_c)
      return false;
  for (size_t i = 0; i < dense.size(); ++i)
    if (dense[i].in != other.dense[i].in || dense[i].out != other.dense[i].out)
      return false;
  return true;
}

Network zeros_like(const Network& net) {
  Network z = net;
  for (ConvLayer& l : z.conv) {
    std::fill(l.w.begin(), l.w.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
  for (DenseLayer& l : z.dense) {
    std::fill(l.w.begin(), l.w.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
  return z;
}

Eigen::VectorXd forward_batch(const Network& net, const Eigen::Ref<const RowMat>& inputs,
                              NetWorkspace& ws, bool keep_intermediates) {
  if (inputs.cols() != net.input.size())
    throw ContractViolation("value network input width mismatch");
  const Eigen::Index n = inputs.rows();
  if (keep_intermediates && n > kNetChunk)
    throw ContractViolation("backward batches are limited to one chunk");
  VectorXd out(n);
  for (Eigen::Index at = 0; at < n; at += kNetChunk) {
    const Eigen::Index take = std::min<Eigen::Index>(kNetChunk, n - at);
    out.segment(at, take) = forward_chunk(net, inputs.middleRows(at, take), ws);
  }
  return out;
}

double forward(const Network& net, std::span<const double> input) {
  if (static_cast<Eigen::Index>(input.size()) != net.input.size())
    throw ContractViolation("value network input width mismatch");
  NetWorkspace ws;
  Eigen::Map<const RowMat> x(input.data(), 1, static_cast<Eigen::Index>(input.size()));
  return forward_chunk(net, x, ws)(0);
}

double loss_and_gradient(const Network& net, const Eigen::Ref<const RowMat>& inputs,
                         const Eigen::Ref<const Eigen::VectorXd>& targets,
                         Network& grads, NetWorkspace& ws) {
  if (inputs.rows() != targets.size())
    throw ContractViolation("batch inputs and targets disagree in length");
  const Eigen::Index n = inputs.rows();
  if (n == 0) throw ContractViolation("empty training batch");
  double sq_sum = 0.0;
  for (Eigen::Index at = 0; at < n; at += kNetChunk) {
    const Eigen::Index take = std::min<Eigen::Index>(kNetChunk, n - at);
    const auto x = inputs.middleRows(at, take);
    VectorXd residual = forward_chunk(net, x, ws) - targets.segment(at, take);
    sq_sum += residual.squaredNorm();
    backward_chunk(net, x, residual, ws, grads);
  }
  // backward accumulated grad of 1/2 sum residual^2; convert to a batch mean.
  const double inv_n = 1.0 / static_cast<double>(n);
  for (ConvLayer& l : grads.conv) {
    for (double& v : l.w) v *= inv_n;
    for (double& v : l.b) v *= inv_n;
  }
  for (DenseLayer& l : grads.dense) {
    for (double& v : l.w) v *= inv_n;
    for (double& v : l.b) v *= inv_n;
  }
  return sq_sum * inv_n;
}

Network gradient(const Network& net, std::span<const double> input, double target) {
  Network grads = zeros_like(net);
  NetWorkspace ws;
  Eigen::Map<const RowMat> x(input.data(), 1, static_cast<Eigen::Index>(input.size()));
  VectorXd t(1);
  t(0) = target;
  loss_and_gradient(net, x, t, grads, ws);
  return grads;
}

Network sgd_step(const Network& net, std::span<const TrainSample> batch, double lr) {
  if (batch.empty()) throw ContractViolation("empty training batch");
  RowMat x(static_cast<Eigen::Index>(batch.size()), net.input.size());
  VectorXd t(static_cast<Eigen::Index>(batch.size()));
  for (size_t i = 0; i < batch.size(); ++i) {
    if (static_cast<Eigen::Index>(batch[i].input.size()) != net.input.size())
      throw ContractViolation("value network input width mismatch");
    x.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(batch[i].input.data(), net.input.size());
    t(static_cast<Eigen::Index>(i)) = batch[i].target;
  }
  Network grads = zeros_like(net);
  NetWorkspace ws;
  loss_and_gradient(net, x, t, grads, ws);
  if (!grads.all_finite())
    throw TrainingDiverged("non-finite gradient in sgd step", -1);
  Network next = net;
  sgd_apply(next, grads, lr, 0.0, nullptr);
  return next;
}

void sgd_apply(Network& net, const Network& grads, double lr, double momentum,
               Network* velocity) {
  for (size_t i = 0; i < net.conv.size(); ++i)
    apply_array(net.conv[i].w, grads.conv[i].w, lr, momentum,
                velocity ? &velocity->conv[i].w : nullptr);
  for (size_t i = 0; i < net.conv.size(); ++i)
    apply_array(net.conv[i].b, grads.conv[i].b, lr, momentum,
                velocity ? &velocity->conv[i].b : nullptr);
  for (size_t i = 0; i < net.dense.size(); ++i)
    apply_array(net.dense[i].w, grads.dense[i].w, lr, momentum,
                velocity ? &velocity->dense[i].w : nullptr);
  for (size_t i = 0; i < net.dense.size(); ++i)
    apply_array(net.dense[i].b, grads.dense[i].b, lr, momentum,
                velocity ? &velocity->dense[i].b : nullptr);
}

}  // namespace ste
