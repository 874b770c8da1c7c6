#include "ste/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ste/errors.hpp"

namespace ste {

Belief::Belief(int nx, int ny, int n_fluxes, std::vector<double> probs)
    : nx_(nx), ny_(ny), n_phi_(n_fluxes), p_(std::move(probs)) {
  if (static_cast<int>(p_.size()) != nx * ny * n_fluxes)
    throw ContractViolation("belief tensor size does not match its shape");
}

Belief Belief::uniform(const EnvParams& params) {
  params.validate();
  const int n = params.n_hypotheses();
  return Belief(params.nx, params.ny, params.n_fluxes(),
                std::vector<double>(static_cast<size_t>(n), 1.0 / n));
}

BayesUpdate bayes_update(const Belief& prior, GridPos pos, int h,
                         const LikelihoodCache& cache) {
  if (h < 0 || h > cache.h_max())
    throw ContractViolation("observed hit count outside {0..h_max}");
  const auto like = cache.likelihood(pos, h);
  const auto p = prior.probs();
  std::vector<double> post(p.size());
  double evidence = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    post[i] = p[i] * like[i];
    evidence += post[i];
  }
  if (evidence < 1e-300)
    throw UpdateError("zero evidence: observation h=" + std::to_string(h) +
                      " is impossible under the current belief");
  const double inv = 1.0 / evidence;
  for (double& q : post) q *= inv;
  return BayesUpdate{Belief(prior.nx(), prior.ny(), prior.n_fluxes(), std::move(post)),
                     evidence};
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double entropy(const Belief& belief) { return entropy(belief.probs()); }

std::vector<double> marginal(const Belief& belief, Axis axis) {
  const int nx = belief.nx(), ny = belief.ny(), nphi = belief.n_fluxes();
  std::vector<double> out;
  switch (axis) {
    case Axis::xs: out.assign(static_cast<size_t>(nx), 0.0); break;
    case Axis::ys: out.assign(static_cast<size_t>(ny), 0.0); break;
    case Axis::phi: out.assign(static_cast<size_t>(nphi), 0.0); break;
  }
  int idx = 0;
  for (int f = 0; f < nphi; ++f)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x, ++idx) {
        const double p = belief[idx];
        switch (axis) {
          case Axis::xs: out[static_cast<size_t>(x)] += p; break;
          case Axis::ys: out[static_cast<size_t>(y)] += p; break;
          case Axis::phi: out[static_cast<size_t>(f)] += p; break;
        }
      }
  return out;
}

double drps(std::span<const double> marginal, int truth_index) {
  double cdf = 0.0;
  double score = 0.0;
  for (size_t k = 0; k < marginal.size(); ++k) {
    cdf += marginal[k];
    const double target = static_cast<int>(k) >= truth_index ? 1.0 : 0.0;
    score += (cdf - target) * (cdf - target);
  }
  return score;
}

MapEstimate map_estimate(const Belief& belief, const EnvParams& params) {
  const auto p = belief.probs();
  int best = 0;
  for (size_t i = 1; i < p.size(); ++i)
    if (p[i] > p[static_cast<size_t>(best)]) best = static_cast<int>(i);
  return MapEstimate{hypothesis_from_index(params, best), p[static_cast<size_t>(best)],
                     best};
}

}  // namespace ste
