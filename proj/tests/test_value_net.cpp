#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ste/errors.hpp"
#include "ste/value_net.hpp"

using namespace ste;

namespace {

EnvParams small_params() {
  EnvParams p;
  p.nx = 3;
  p.ny = 3;
  p.fluxes = {1.0, 2.0};
  p.wind_speed = 1.0;
  p.diffusivity = 1.0;
  return p;
}

std::vector<std::vector<double>*> weight_arrays(Network& net) {
  std::vector<std::vector<double>*> out;
  for (ConvLayer& l : net.conv) {
    out.push_back(&l.w);
    out.push_back(&l.b);
  }
  for (DenseLayer& l : net.dense) {
    out.push_back(&l.w);
    out.push_back(&l.b);
  }
  return out;
}

void randomize_head(Network& net, Rng& rng) {
  DenseLayer& head = net.dense.back();
  for (double& v : head.w) v = (2.0 * rng.uniform() - 1.0) * 0.5;
  for (double& v : head.b) v = (2.0 * rng.uniform() - 1.0) * 0.5;
}

// Freshly initialized hidden biases are zero, which parks relu kinks exactly
// at the origin; nudging them keeps finite differences off the kinks.
void randomize_biases(Network& net, Rng& rng) {
  for (ConvLayer& l : net.conv)
    for (double& v : l.b) v = (2.0 * rng.uniform() - 1.0) * 0.05;
  for (DenseLayer& l : net.dense)
    for (double& v : l.b) v = (2.0 * rng.uniform() - 1.0) * 0.05;
}

std::vector<double> random_input(int n, Rng& rng) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform();
  return x;
}

// Straight-loop reference implementations, independent of the Eigen engine.

double ref_fc(const Network& net, const std::vector<double>& x) {
  std::vector<double> cur = x;
  for (size_t li = 0; li < net.dense.size(); ++li) {
    const DenseLayer& l = net.dense[li];
    std::vector<double> next(l.out);
    for (int o = 0; o < l.out; ++o) {
      double acc = l.b[o];
      for (int i = 0; i < l.in; ++i) acc += l.w[static_cast<size_t>(o) * l.in + i] * cur[i];
      next[o] = li + 1 < net.dense.size() ? std::max(acc, 0.0) : acc;
    }
    cur = std::move(next);
  }
  return cur[0];
}

std::vector<double> ref_conv_relu(const std::vector<double>& in, int h, int w, int cin,
                                  const ConvLayer& l) {
  std::vector<double> out(static_cast<size_t>(h) * w * l.out_c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int oc = 0; oc < l.out_c; ++oc) {
        double acc = l.b[oc];
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx) {
            const int iy = y + ky - 1, ix = x + kx - 1;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
            for (int ic = 0; ic < cin; ++ic)
              acc += in[(static_cast<size_t>(iy) * w + ix) * cin + ic] *
                     l.w[((static_cast<size_t>(ky) * 3 + kx) * cin + ic) * l.out_c + oc];
          }
        out[(static_cast<size_t>(y) * w + x) * l.out_c + oc] = std::max(acc, 0.0);
      }
  return out;
}

std::vector<double> ref_pool(const std::vector<double>& in, int h, int w, int c) {
  const int hp = h / 2, wp = w / 2;
  std::vector<double> out(static_cast<size_t>(hp) * wp * c);
  for (int y = 0; y < hp; ++y)
    for (int x = 0; x < wp; ++x)
      for (int k = 0; k < c; ++k) {
        const auto at = [&](int iy, int ix) {
          return in[(static_cast<size_t>(iy) * w + ix) * c + k];
        };
        out[(static_cast<size_t>(y) * wp + x) * c + k] =
            0.25 * (at(2 * y, 2 * x) + at(2 * y, 2 * x + 1) + at(2 * y + 1, 2 * x) +
                    at(2 * y + 1, 2 * x + 1));
      }
  return out;
}

double ref_cnn(const Network& net, const std::vector<double>& x) {
  std::vector<double> cur = x;
  int h = net.input.height, w = net.input.width, c = net.input.channels;
  for (size_t i = 0; i < net.conv.size(); ++i) {
    cur = ref_conv_relu(cur, h, w, c, net.conv[i]);
    c = net.conv[i].out_c;
    if (i < 2) {
      cur = ref_pool(cur, h, w, c);
      h /= 2;
      w /= 2;
    }
  }
  const DenseLayer& head = net.dense[0];
  double acc = head.b[0];
  for (int i = 0; i < head.in; ++i) acc += head.w[i] * cur[i];
  return acc;
}

double ref_forward(const Network& net, const std::vector<double>& x) {
  return net.kind == ArchKind::fc ? ref_fc(net, x) : ref_cnn(net, x);
}

}  // namespace

TEST_CASE("architecture names round-trip") {
  CHECK(arch_from_string("fc") == ArchKind::fc);
  CHECK(arch_from_string("cnn") == ArchKind::cnn);
  CHECK(arch_from_string(to_string(ArchKind::cnn)) == ArchKind::cnn);
  CHECK_THROWS_AS(arch_from_string("mlp"), ConfigError);
}

TEST_CASE("input geometry mirrors the egocentric tensor") {
  EnvParams p;
  const InputGeometry g = input_geometry(p);
  CHECK(g.width == 21);
  CHECK(g.height == 21);
  CHECK(g.channels == 5);
  CHECK(g.size() == 2205);
  CHECK(input_geometry(p, true).channels == 6);
}

TEST_CASE("parameter counts for the reference geometry") {
  EnvParams p;
  Rng rng(1);
  const Network fc = Network::make(ArchKind::fc, input_geometry(p), rng);
  CHECK(fc.parameter_count() == 72737);
  CHECK(fc.conv.empty());
  REQUIRE(fc.dense.size() == 4);

  const Network cnn = Network::make(ArchKind::cnn, input_geometry(p), rng);
  CHECK(cnn.parameter_count() == 30017);
  REQUIRE(cnn.conv.size() == 4);
  REQUIRE(cnn.dense.size() == 1);
  CHECK(cnn.dense[0].in == 800);
}

TEST_CASE("initialization is bounded, reproducible, and zero-headed") {
  EnvParams p;
  Rng a(5), b(5), c(6);
  Network n1 = Network::make(ArchKind::fc, input_geometry(p), a);
  Network n2 = Network::make(ArchKind::fc, input_geometry(p), b);
  Network n3 = Network::make(ArchKind::fc, input_geometry(p), c);
  CHECK(n1 == n2);
  CHECK(n1 != n3);

  for (size_t li = 0; li + 1 < n1.dense.size(); ++li) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(n1.dense[li].in));
    for (double v : n1.dense[li].w) CHECK(std::fabs(v) <= bound);
    for (double v : n1.dense[li].b) CHECK(v == 0.0);
  }
  for (double v : n1.dense.back().w) CHECK(v == 0.0);
  CHECK(n1.dense.back().b[0] == 0.0);

  Rng d(5);
  Network cnn = Network::make(ArchKind::cnn, input_geometry(p), d);
  for (const ConvLayer& l : cnn.conv) {
    const double bound = 1.0 / std::sqrt(9.0 * l.in_c);
    for (double v : l.w) CHECK(std::fabs(v) <= bound);
    for (double v : l.b) CHECK(v == 0.0);
  }
  for (double v : cnn.dense[0].w) CHECK(v == 0.0);

  // A fresh network values every state at exactly zero.
  Rng xr(9);
  const auto x_fc = random_input(n1.input.size(), xr);
  const auto x_cnn = random_input(cnn.input.size(), xr);
  CHECK(forward(n1, x_fc) == 0.0);
  CHECK(forward(cnn, x_cnn) == 0.0);
}

TEST_CASE("cnn input too small to pool is rejected") {
  EnvParams p = small_params();
  p.nx = 2;
  p.ny = 2;  // 3 x 3 input collapses after two pools
  Rng rng(2);
  CHECK_THROWS_AS(Network::make(ArchKind::cnn, input_geometry(p), rng), ConfigError);
}

TEST_CASE("fc forward matches the loop reference") {
  const EnvParams p = small_params();
  Rng rng(11);
  Network net = Network::make(ArchKind::fc, input_geometry(p), rng);
  randomize_head(net, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_input(net.input.size(), rng);
    CHECK(forward(net, x) == doctest::Approx(ref_forward(net, x)).epsilon(1e-12));
  }
}

TEST_CASE("cnn forward matches the loop reference") {
  const EnvParams p = small_params();
  Rng rng(13);
  Network net = Network::make(ArchKind::cnn, input_geometry(p), rng);
  randomize_head(net, rng);
  REQUIRE(net.dense[0].in == 32);  // 5x5 -> 2x2 -> 1x1 spatial
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_input(net.input.size(), rng);
    CHECK(forward(net, x) == doctest::Approx(ref_forward(net, x)).epsilon(1e-12));
  }
}

TEST_CASE("batched forward equals per-row forward across chunk boundaries") {
  const EnvParams p = small_params();
  for (ArchKind kind : {ArchKind::fc, ArchKind::cnn}) {
    Rng rng(17);
    Network net = Network::make(kind, input_geometry(p), rng);
    randomize_head(net, rng);
    const int n = kNetChunk + 22;
    RowMat x(n, net.input.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < net.input.size(); ++j) x(i, j) = rng.uniform();
    NetWorkspace ws;
    const Eigen::VectorXd v = forward_batch(net, x, ws);
    REQUIRE(v.size() == n);
    for (int i = 0; i < n; ++i) {
      std::vector<double> row(x.row(i).begin(), x.row(i).end());
      CAPTURE(static_cast<int>(kind));
      CAPTURE(i);
      CHECK(v(i) == doctest::Approx(forward(net, row)).epsilon(1e-12));
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  const EnvParams p = small_params();
  for (ArchKind kind : {ArchKind::fc, ArchKind::cnn}) {
    Rng rng(kind == ArchKind::fc ? 19 : 23);
    Network net = Network::make(kind, input_geometry(p), rng);
    randomize_head(net, rng);
    randomize_biases(net, rng);
    const auto x = random_input(net.input.size(), rng);
    const double target = 0.3;

    Network analytic = gradient(net, x, target);
    Network probe = net;
    auto arrays = weight_arrays(probe);
    auto grads = weight_arrays(analytic);
    REQUIRE(arrays.size() == grads.size());

    const double eps = 1e-7;
    for (size_t ai = 0; ai < arrays.size(); ++ai) {
      std::vector<double>& w = *arrays[ai];
      const std::vector<double>& g = *grads[ai];
      REQUIRE(w.size() == g.size());
      for (size_t idx : {size_t{0}, w.size() / 3, w.size() / 2, w.size() - 1}) {
        const double saved = w[idx];
        w[idx] = saved + eps;
        const double up = forward(probe, x) - target;
        w[idx] = saved - eps;
        const double dn = forward(probe, x) - target;
        w[idx] = saved;
        const double numeric = (0.5 * up * up - 0.5 * dn * dn) / (2.0 * eps);
        CAPTURE(static_cast<int>(kind));
        CAPTURE(ai);
        CAPTURE(idx);
        CHECK(std::fabs(g[idx] - numeric) <= 1e-7 + 1e-4 * std::fabs(numeric));
      }
    }
  }
}

TEST_CASE("batch gradient is the mean of per-sample gradients") {
  const EnvParams p = small_params();
  for (ArchKind kind : {ArchKind::fc, ArchKind::cnn}) {
    Rng rng(29);
    Network net = Network::make(kind, input_geometry(p), rng);
    randomize_head(net, rng);
    const int n = 4;
    RowMat x(n, net.input.size());
    Eigen::VectorXd t(n);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n; ++i) {
      rows.push_back(random_input(net.input.size(), rng));
      for (int j = 0; j < net.input.size(); ++j) x(i, j) = rows.back()[j];
      t(i) = rng.uniform();
    }

    Network batch = zeros_like(net);
    NetWorkspace ws;
    const double loss = loss_and_gradient(net, x, t, batch, ws);

    double want_loss = 0.0;
    Network mean = zeros_like(net);
    auto mean_arrays = weight_arrays(mean);
    for (int i = 0; i < n; ++i) {
      const double r = forward(net, rows[i]) - t(i);
      want_loss += r * r;
      Network gi = gradient(net, rows[i], t(i));
      auto gi_arrays = weight_arrays(gi);
      for (size_t ai = 0; ai < mean_arrays.size(); ++ai)
        for (size_t j = 0; j < mean_arrays[ai]->size(); ++j)
          (*mean_arrays[ai])[j] += (*gi_arrays[ai])[j] / n;
    }
    CHECK(loss == doctest::Approx(want_loss / n).epsilon(1e-12));

    auto batch_arrays = weight_arrays(batch);
    for (size_t ai = 0; ai < mean_arrays.size(); ++ai)
      for (size_t j = 0; j < mean_arrays[ai]->size(); ++j) {
        CAPTURE(ai);
        CAPTURE(j);
        CHECK((*batch_arrays[ai])[j] ==
              doctest::Approx((*mean_arrays[ai])[j]).epsilon(1e-10));
      }
  }
}

TEST_CASE("sgd steps down the gradient") {
  const EnvParams p = small_params();
  Rng rng(31);
  Network net = Network::make(ArchKind::fc, input_geometry(p), rng);
  randomize_head(net, rng);

  std::vector<TrainSample> batch(2);
  for (TrainSample& s : batch) {
    s.input = random_input(net.input.size(), rng);
    s.target = rng.uniform();
  }
  const double lr = 0.01;
  Network next = sgd_step(net, batch, lr);

  Network g0 = gradient(net, batch[0].input, batch[0].target);
  Network g1 = gradient(net, batch[1].input, batch[1].target);
  const DenseLayer& l = net.dense[0];
  for (size_t j : {size_t{0}, l.w.size() / 3, l.w.size() - 1}) {
    const double want = l.w[j] - lr * 0.5 * (g0.dense[0].w[j] + g1.dense[0].w[j]);
    CHECK(next.dense[0].w[j] == doctest::Approx(want).epsilon(1e-12));
  }

  // The step reduces the batch loss for a small enough learning rate.
  auto batch_loss = [&](const Network& n) {
    double acc = 0.0;
    for (const TrainSample& s : batch) {
      const double r = forward(n, s.input) - s.target;
      acc += r * r;
    }
    return acc / batch.size();
  };
  CHECK(batch_loss(next) < batch_loss(net));
}

TEST_CASE("momentum accumulates velocity") {
  const EnvParams p = small_params();
  Rng rng(37);
  Network net = Network::make(ArchKind::fc, input_geometry(p), rng);
  randomize_head(net, rng);
  Network grads = zeros_like(net);
  grads.dense[0].w[0] = 2.0;
  grads.dense[3].b[0] = -1.0;

  Network plain = net;
  sgd_apply(plain, grads, 0.1, 0.0, nullptr);
  CHECK(plain.dense[0].w[0] == doctest::Approx(net.dense[0].w[0] - 0.2).epsilon(1e-15));

  Network momentum = net;
  Network vel = zeros_like(net);
  sgd_apply(momentum, grads, 0.1, 0.9, &vel);
  sgd_apply(momentum, grads, 0.1, 0.9, &vel);
  // Velocity after two steps: g, then 1.9 g.
  const double want = net.dense[0].w[0] - 0.1 * 2.0 - 0.1 * 1.9 * 2.0;
  CHECK(momentum.dense[0].w[0] == doctest::Approx(want).epsilon(1e-12));
  CHECK(vel.dense[3].b[0] == doctest::Approx(-1.9).epsilon(1e-12));
}

TEST_CASE("shape helpers") {
  const EnvParams p = small_params();
  Rng rng(41);
  Network fc = Network::make(ArchKind::fc, input_geometry(p), rng);
  Network cnn = Network::make(ArchKind::cnn, input_geometry(p), rng);
  CHECK(fc.same_shape(fc));
  CHECK(!fc.same_shape(cnn));
  CHECK(fc.all_finite());

  Network z = zeros_like(cnn);
  CHECK(z.same_shape(cnn));
  for (const ConvLayer& l : z.conv)
    for (double v : l.w) CHECK(v == 0.0);

  Network broken = fc;
  broken.dense[1].w[3] = std::nan("");
  CHECK(!broken.all_finite());
}
