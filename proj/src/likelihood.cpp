#include "ste/likelihood.hpp"

#include <cmath>
#include <limits>

#include "ste/errors.hpp"
#include "ste/plume.hpp"

namespace ste {

LikelihoodCache::LikelihoodCache(const EnvParams& params) {
  params.validate();
  nx_ = params.nx;
  ny_ = params.ny;
  n_hyp_ = params.n_hypotheses();
  h_max_ = params.h_max;

  const double lambda = dispersion_length(params);
  if (!(lambda > params.radius))
    throw ConfigError("dispersion length must exceed the agent radius");
  const double inv_log_lr = 1.0 / std::log(lambda / params.radius);

  const size_t n_pos = static_cast<size_t>(nx_) * ny_;
  mu_.resize(n_pos * n_hyp_);
  like_.resize(n_pos * (h_max_ + 1) * n_hyp_);
  log_like_.resize(like_.size());

  std::vector<double> pmf(static_cast<size_t>(h_max_) + 1);
  for (int y = 0; y < ny_; ++y) {
    for (int x = 0; x < nx_; ++x) {
      const GridPos pos{x, y};
      const size_t p = static_cast<size_t>(y * nx_ + x);
      for (int i = 0; i < n_hyp_; ++i) {
        const SourceTerm theta = hypothesis_from_index(params, i);
        const double mu = mean_hits(theta, pos, params, lambda, inv_log_lr);
        mu_[p * n_hyp_ + i] = mu;
        hit_distribution(mu, h_max_, pmf);
        for (int h = 0; h <= h_max_; ++h) {
          const size_t idx = (p * (h_max_ + 1) + h) * n_hyp_ + i;
          like_[idx] = pmf[static_cast<size_t>(h)];
          log_like_[idx] = pmf[static_cast<size_t>(h)] > 0.0
                               ? std::log(pmf[static_cast<size_t>(h)])
                               : -std::numeric_limits<double>::infinity();
        }
      }
    }
  }
}

}  // namespace ste
