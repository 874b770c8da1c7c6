#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ste/errors.hpp"
#include "ste/plume.hpp"
#include "ste/rng.hpp"

using namespace ste;

namespace {
#include "data/bessel_k0_oracle.inc"
}

TEST_CASE("bessel_k0 matches the reference table") {
  for (const auto& row : kBesselK0Table) {
    const double z = row[0], want = row[1];
    const double got = bessel_k0(z);
    const double abs_err = std::fabs(got - want);
    const double rel_err = want > 0 ? abs_err / want : abs_err;
    CAPTURE(z);
    CHECK((abs_err <= 1e-9 || rel_err <= 1e-9));
  }
}

TEST_CASE("bessel_k0 rejects nonpositive arguments") {
  CHECK_THROWS_AS(bessel_k0(0.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k0(-1.0), std::domain_error);
}

TEST_CASE("bessel_k0 is positive and decreasing") {
  double prev = bessel_k0(1e-4);
  for (double z = 0.01; z < 30.0; z += 0.37) {
    const double v = bessel_k0(z);
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("dispersion length follows the mixing formula") {
  EnvParams p;
  const double want = std::sqrt(p.diffusivity * p.lifetime /
                                (1.0 + p.wind_speed * p.wind_speed * p.lifetime /
                                           (4.0 * p.diffusivity)));
  CHECK(dispersion_length(p) == doctest::Approx(want).epsilon(1e-15));
  CHECK(dispersion_length(p) == doctest::Approx(2.0).epsilon(1e-6));

  EnvParams still = p;
  still.wind_speed = 0.0;
  CHECK(dispersion_length(still) ==
        doctest::Approx(std::sqrt(still.diffusivity * still.lifetime)).epsilon(1e-15));
}

TEST_CASE("mean hits is radially symmetric without wind") {
  EnvParams p;
  p.wind_speed = 0.0;
  SourceTerm theta{5, 5, 3.0};
  const double right = mean_hits(theta, {8, 5}, p);
  const double up = mean_hits(theta, {5, 8}, p);
  const double diag_a = mean_hits(theta, {8, 9}, p);  // displacement (3, 4)
  const double diag_b = mean_hits(theta, {9, 8}, p);  // displacement (4, 3)
  CHECK(right == doctest::Approx(up).epsilon(1e-15));
  CHECK(diag_a == doctest::Approx(diag_b).epsilon(1e-15));
}

TEST_CASE("wind enriches the downwind side") {
  EnvParams p;  // wind toward negative y
  SourceTerm theta{5, 5, 1.0};
  CHECK(mean_hits(theta, {5, 4}, p) > mean_hits(theta, {5, 6}, p));
  CHECK(mean_hits(theta, {5, 0}, p) > mean_hits(theta, {5, 10}, p));
}

TEST_CASE("mean hits decays with crosswind distance and scales with flux") {
  EnvParams p;
  SourceTerm theta{5, 5, 1.0};
  double prev = mean_hits(theta, {5, 5}, p);
  for (int d = 1; d <= 5; ++d) {
    const double v = mean_hits(theta, {5 + d, 5}, p);
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }
  SourceTerm strong{5, 5, 4.0};
  CHECK(mean_hits(strong, {7, 3}, p) ==
        doctest::Approx(4.0 * mean_hits(theta, {7, 3}, p)).epsilon(1e-14));
}

TEST_CASE("agent on the source cell sees the self-distance value") {
  EnvParams p;
  SourceTerm theta{5, 5, 2.0};
  const double lambda = dispersion_length(p);
  const double want = theta.phi * p.dt / std::log(lambda / p.radius) *
                      bessel_k0(p.self_distance / lambda);
  CHECK(mean_hits(theta, {5, 5}, p) == doctest::Approx(want).epsilon(1e-14));
  CHECK(mean_hits(theta, {5, 5}, p) > mean_hits(theta, {5, 4}, p));
}

TEST_CASE("hoisted mean hits agrees with the simple overload") {
  EnvParams p;
  const double lambda = dispersion_length(p);
  const double inv_log_lr = 1.0 / std::log(lambda / p.radius);
  SourceTerm theta{2, 9, 5.0};
  for (int y = 0; y < p.ny; y += 3)
    for (int x = 0; x < p.nx; x += 3)
      CHECK(mean_hits(theta, {x, y}, p) ==
            mean_hits(theta, {x, y}, p, lambda, inv_log_lr));
}

TEST_CASE("a dispersion length at or below the body radius is rejected") {
  EnvParams p;
  p.lifetime = 0.1;  // lambda ~ 0.44 < radius
  CHECK_THROWS_AS(mean_hits(SourceTerm{0, 0, 1.0}, {1, 1}, p), ConfigError);
}

TEST_CASE("hit distribution lumps the Poisson tail into the top bin") {
  const auto p = hit_distribution(1.0, 3);
  const double e1 = std::exp(-1.0);
  REQUIRE(p.size() == 4);
  CHECK(p[0] == doctest::Approx(e1).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(e1).epsilon(1e-15));
  CHECK(p[2] == doctest::Approx(0.5 * e1).epsilon(1e-15));
  CHECK(p[3] == doctest::Approx(1.0 - 2.5 * e1).epsilon(1e-13));
}

TEST_CASE("hit distribution is a probability vector for any mean") {
  for (double mu : {0.0, 1e-9, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0}) {
    const auto p = hit_distribution(mu, 3);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CAPTURE(mu);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto zero = hit_distribution(0.0, 3);
  CHECK(zero[0] == 1.0);
  CHECK(zero[1] == 0.0);
  CHECK(zero[3] == 0.0);

  CHECK(hit_distribution(5.0, 3)[3] > hit_distribution(1.0, 3)[3]);
}

TEST_CASE("hit sampling reproduces the distribution") {
  const double mu = 1.3;
  const int h_max = 3;
  const auto want = hit_distribution(mu, h_max);
  Rng rng(42);
  const int n = 200000;
  std::vector<int> count(h_max + 1, 0);
  for (int i = 0; i < n; ++i) {
    const int h = sample_hits(mu, h_max, rng);
    REQUIRE(h >= 0);
    REQUIRE(h <= h_max);
    ++count[h];
  }
  for (int h = 0; h <= h_max; ++h) {
    const double freq = static_cast<double>(count[h]) / n;
    const double sigma = std::sqrt(want[h] * (1.0 - want[h]) / n);
    CAPTURE(h);
    CHECK(std::fabs(freq - want[h]) < 4.0 * sigma);
  }

  Rng zero_rng(7);
  for (int i = 0; i < 100; ++i) CHECK(sample_hits(0.0, h_max, zero_rng) == 0);
}

TEST_CASE("mean hit map peaks at the source and respects the cap") {
  EnvParams p;
  // Weak source: nothing clamps, so the argmax is unambiguous.
  SourceTerm weak{3, 7, 1.0};
  const HitField field = mean_hit_map(weak, p);
  REQUIRE(field.nx == p.nx);
  REQUIRE(field.ny == p.ny);
  double best = -1.0;
  int best_x = -1, best_y = -1;
  for (int y = 0; y < p.ny; ++y)
    for (int x = 0; x < p.nx; ++x) {
      const double v = field.at(x, y);
      CHECK(v >= 0.0);
      CHECK(v <= p.h_max);
      CHECK(v == doctest::Approx(std::min(mean_hits(weak, {x, y}, p),
                                          static_cast<double>(p.h_max))));
      if (v > best) {
        best = v;
        best_x = x;
        best_y = y;
      }
    }
  CHECK(best_x == weak.xs);
  CHECK(best_y == weak.ys);

  // Strong source: the plume core pins at the cap.
  const HitField capped = mean_hit_map(SourceTerm{3, 7, 5.0}, p);
  CHECK(capped.at(3, 7) == doctest::Approx(p.h_max));
  CHECK(mean_hits(SourceTerm{3, 7, 5.0}, {3, 7}, p) > p.h_max);
}
