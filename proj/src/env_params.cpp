#include "ste/env_params.hpp"

#include <cmath>
#include <set>
#include <string>

namespace ste {

void EnvParams::validate() const {
  if (nx < 1 || ny < 1) throw ConfigError("grid must have at least one cell per axis");
  if (fluxes.empty()) throw ConfigError("flux set must be non-empty");
  std::set<double> distinct;
  for (double phi : fluxes) {
    if (!(phi > 0.0) || !std::isfinite(phi))
      throw ConfigError("fluxes must be strictly positive and finite");
    distinct.insert(phi);
  }
  if (distinct.size() != fluxes.size()) throw ConfigError("fluxes must be distinct");
  if (!(diffusivity > 0.0)) throw ConfigError("diffusivity must be > 0");
  if (!(lifetime > 0.0)) throw ConfigError("lifetime must be > 0");
  if (!(radius > 0.0)) throw ConfigError("radius must be > 0");
  if (!(wind_speed >= 0.0)) throw ConfigError("wind speed must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (h_max < 1) throw ConfigError("h_max must be >= 1");
  if (!(self_distance > 0.0) || !(self_distance <= radius))
    throw ConfigError("self_distance must be in (0, radius]");
}

int flux_index_of(const EnvParams& params, double phi) {
  for (int i = 0; i < params.n_fluxes(); ++i)
    if (params.fluxes[i] == phi) return i;
  throw ConfigError("flux value " + std::to_string(phi) + " is not in the flux set");
}

int hypothesis_index(const EnvParams& params, const SourceTerm& term) {
  return hypothesis_index(params, term.xs, term.ys, flux_index_of(params, term.phi));
}

SourceTerm hypothesis_from_index(const EnvParams& params, int index) {
  const int xs = index % params.nx;
  const int ys = (index / params.nx) % params.ny;
  const int flux_index = index / (params.nx * params.ny);
  return SourceTerm{xs, ys, params.fluxes[static_cast<size_t>(flux_index)]};
}

}  // namespace ste
