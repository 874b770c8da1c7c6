#include "ste/plume.hpp"

#include <algorithm>
#include <cmath>

#include "ste/errors.hpp"

namespace ste {

double dispersion_length(const EnvParams& params) {
  const double v = params.wind_speed;
  const double d = params.diffusivity;
  const double tau = params.lifetime;
  return std::sqrt(d * tau / (1.0 + v * v * tau / (4.0 * d)));
}

double mean_hits(const SourceTerm& theta, GridPos pos, const EnvParams& params,
                 double lambda, double inv_log_lr) {
  const double dx = static_cast<double>(pos.x) - theta.xs;
  const double dy = static_cast<double>(pos.y) - theta.ys;
  const double dist = std::max(std::sqrt(dx * dx + dy * dy), params.self_distance);
  const double drift =
      std::exp(-dy * params.wind_speed / (2.0 * params.diffusivity));
  return theta.phi * params.dt * inv_log_lr * drift * bessel_k0(dist / lambda);
}

double mean_hits(const SourceTerm& theta, GridPos pos, const EnvParams& params) {
  const double lambda = dispersion_length(params);
  if (!(lambda > params.radius))
    throw ConfigError("dispersion length must exceed the agent radius");
  return mean_hits(theta, pos, params, lambda, 1.0 / std::log(lambda / params.radius));
}

void hit_distribution(double mu, int h_max, std::span<double> out) {
  // p(h) = mu^h e^{-mu} / h! for h < h_max, remaining Poisson mass in the top
  // bin. e^{-mu} underflows for mu beyond ~745; all mass then sits in the tail.
  double term = std::exp(-mu);
  double cum = 0.0;
  for (int h = 0; h < h_max; ++h) {
    out[static_cast<size_t>(h)] = term;
    cum += term;
    term *= mu / (h + 1);
  }
  out[static_cast<size_t>(h_max)] = std::max(0.0, 1.0 - cum);
}

std::vector<double> hit_distribution(double mu, int h_max) {
  std::vector<double> out(static_cast<size_t>(h_max) + 1);
  hit_distribution(mu, h_max, out);
  return out;
}

int sample_hits(double mu, int h_max, Rng& rng) {
  std::vector<double> p(static_cast<size_t>(h_max) + 1);
  hit_distribution(mu, h_max, p);
  const double u = rng.uniform();
  double cum = 0.0;
  for (int h = 0; h < h_max; ++h) {
    cum += p[static_cast<size_t>(h)];
    if (u < cum) return h;
  }
  return h_max;
}

HitField mean_hit_map(const SourceTerm& theta, const EnvParams& params) {
  const double lambda = dispersion_length(params);
  if (!(lambda > params.radius))
    throw ConfigError("dispersion length must exceed the agent radius");
  const double inv_log_lr = 1.0 / std::log(lambda / params.radius);
  HitField field;
  field.nx = params.nx;
  field.ny = params.ny;
  field.mu.resize(static_cast<size_t>(params.nx) * params.ny);
  for (int y = 0; y < params.ny; ++y)
    for (int x = 0; x < params.nx; ++x)
      field.mu[static_cast<size_t>(y) * params.nx + x] = std::min(
          static_cast<double>(params.h_max),
          mean_hits(theta, GridPos{x, y}, params, lambda, inv_log_lr));
  return field;
}

}  // namespace ste
