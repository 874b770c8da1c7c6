#ifndef STE_PLUME_HPP
#define STE_PLUME_HPP

#include <span>
#include <vector>

#include "ste/env_params.hpp"
#include "ste/rng.hpp"

namespace ste {

// Modified Bessel function of the second kind, order zero. Power series for
// small arguments, asymptotic expansion for large ones; absolute error below
// 1e-9 over [1e-6, 700]. Underflows smoothly to 0 for very large z.
// Throws std::domain_error for z <= 0.
double bessel_k0(double z);

// Plume dispersion length  lambda = sqrt(D tau / (1 + V^2 tau / (4 D))).
double dispersion_length(const EnvParams& params);

// Mean hit count mu(theta, x) for an agent at pos:
//   mu = phi dt (1/ln(lambda/r)) exp(-(y - ys) V / (2D)) K0(d / lambda)
// with d = max(||x - xs||, r); the clamp keeps mu finite when the agent sits
// on the source cell. Throws ConfigError if lambda <= r.
double mean_hits(const SourceTerm& theta, GridPos pos, const EnvParams& params);

// Internals reused by the likelihood cache: lambda and 1/ln(lambda/r) are
// hoisted out of the per-cell loop.
double mean_hits(const SourceTerm& theta, GridPos pos, const EnvParams& params,
                 double lambda, double inv_log_lr);

// Capped Poisson hit distribution over {0, ..., h_max}:
//   p(h) = mu^h e^{-mu} / h!              for h < h_max
//   p(h_max) = 1 - sum_{h < h_max} p(h)   (tail mass lumped into the top bin)
// out must have h_max + 1 entries; every entry is >= 0 and the vector sums
// to 1 up to rounding.
void hit_distribution(double mu, int h_max, std::span<double> out);
std::vector<double> hit_distribution(double mu, int h_max);

// One draw from hit_distribution(mu, h_max); deterministic given the stream.
int sample_hits(double mu, int h_max, Rng& rng);

// Mean hit count at every grid cell for a fixed source, clamped to h_max.
// Export/visualization only; inference always goes through the unclamped mu.
struct HitField {
  int nx = 0;
  int ny = 0;
  std::vector<double> mu;  // row-major, index y * nx + x
  double at(int x, int y) const { return mu[static_cast<size_t>(y) * nx + x]; }
};
HitField mean_hit_map(const SourceTerm& theta, const EnvParams& params);

}  // namespace ste

#endif
