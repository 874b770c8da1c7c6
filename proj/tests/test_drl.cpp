#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "ste/belief.hpp"
#include "ste/drl.hpp"
#include "ste/environment.hpp"
#include "ste/infotaxis.hpp"

using namespace ste;

namespace {

Belief random_belief(const EnvParams& p, Rng& rng) {
  std::vector<double> probs(p.n_hypotheses());
  double sum = 0.0;
  for (double& v : probs) {
    v = rng.uniform() + 1e-6;
    sum += v;
  }
  for (double& v : probs) v /= sum;
  return Belief(p.nx, p.ny, p.n_fluxes(), std::move(probs));
}

std::shared_ptr<Network> fresh_net(ArchKind kind, const EnvParams& p, bool tc,
                                   std::uint64_t seed) {
  Rng rng(seed);
  return std::make_shared<Network>(Network::make(kind, input_geometry(p, tc), rng));
}

}  // namespace

TEST_CASE("encoding is the egocentric tensor plus an optional time plane") {
  const EnvParams p;
  Environment env(p);
  Rng rng(5);
  BeliefState state{{2, 7}, random_belief(p, rng), 6, 20};

  const auto tensor = egocentric_tensor(state);
  const int n = static_cast<int>(tensor.size());
  REQUIRE(value_input_size(p, false) == n);
  REQUIRE(value_input_size(p, true) ==
          n + (2 * p.nx - 1) * (2 * p.ny - 1));

  std::vector<double> plain(static_cast<size_t>(value_input_size(p, false)));
  encode_state(state, false, plain);
  CHECK(std::vector<double>(plain.begin(), plain.end()) == tensor);

  std::vector<double> timed(static_cast<size_t>(value_input_size(p, true)));
  encode_state(state, true, timed);
  const int channels = p.n_fluxes() + 1;
  const double remaining = static_cast<double>(state.horizon - state.step) /
                           static_cast<double>(state.horizon);
  for (int pix = 0; pix < (2 * p.nx - 1) * (2 * p.ny - 1); ++pix) {
    for (int c = 0; c < p.n_fluxes(); ++c)
      CHECK(timed[static_cast<size_t>(pix * channels + c)] ==
            tensor[static_cast<size_t>(pix * p.n_fluxes() + c)]);
    CHECK(timed[static_cast<size_t>(pix * channels + p.n_fluxes())] ==
          doctest::Approx(remaining));
  }
}

// A freshly initialized network values every state at exactly zero, so the
// one-step lookahead reduces to the expected-entropy objective and the actor
// must agree with the entropy-greedy policy decision for decision.
TEST_CASE("an untrained actor reproduces entropy-greedy decisions exactly") {
  const EnvParams p;
  Environment env(p);
  for (ArchKind kind : {ArchKind::fc, ArchKind::cnn}) {
    CAPTURE(static_cast<int>(kind));
    DrlActor actor(env, fresh_net(kind, p, false, 99), false);
    Rng rng(40 + static_cast<std::uint64_t>(kind));
    for (int trial = 0; trial < 200; ++trial) {
      GridPos pos{rng.uniform_int(p.nx), rng.uniform_int(p.ny)};
      const int step = rng.uniform_int(20);
      BeliefState state{pos, random_belief(p, rng), step, 20};

      const auto q = actor.action_values(state);
      for (Action a : kAllActions) {
        const auto i = static_cast<size_t>(a);
        if (!env.is_feasible(pos, a)) {
          CHECK(q[i] == std::numeric_limits<double>::infinity());
        } else {
          CHECK(q[i] == doctest::Approx(expected_entropy(state, a, env))
                            .epsilon(1e-12));
        }
      }
      CHECK(actor.tied_set(state) == infotaxis_tied_set(state, env));

      // Same tie set, same single draw: the action streams coincide too.
      Rng ra(trial + 1), rb(trial + 1);
      CHECK(actor.act(state, ra) == infotaxis_action(state, env, rb));
    }
  }
}

TEST_CASE("terminal successors contribute no continuation value") {
  const EnvParams p;
  Environment env(p);
  // Perturb the head so the network is decidedly nonzero.
  auto net = fresh_net(ArchKind::fc, p, false, 7);
  for (double& w : net->dense.back().w) w = 0.37;
  net->dense.back().b[0] = -1.4;

  DrlActor actor(env, net, false);
  Rng rng(11);
  BeliefState last{env.start_pos(), random_belief(p, rng), 19, 20};
  const auto q = actor.action_values(last);
  for (Action a : env.feasible_actions(last.pos)) {
    CHECK(q[static_cast<size_t>(a)] ==
          doctest::Approx(expected_entropy(last, a, env)).epsilon(1e-12));
  }
}
