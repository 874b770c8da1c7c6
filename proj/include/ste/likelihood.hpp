#ifndef STE_LIKELIHOOD_HPP
#define STE_LIKELIHOOD_HPP

#include <span>
#include <vector>

#include "ste/env_params.hpp"

namespace ste {

// Pr(h | theta, pos) for every hypothesis, grid position, and hit count,
// precomputed once per EnvParams. Posterior updates, infotaxis, and Bellman
// backups all evaluate this in inner loops, so both the likelihood and its
// logarithm are tabulated. Built once, then shared read-only.
class LikelihoodCache {
 public:
  explicit LikelihoodCache(const EnvParams& params);

  int n_hypotheses() const { return n_hyp_; }
  int h_max() const { return h_max_; }

  // Likelihood vector over hypotheses, in hypothesis-index order.
  std::span<const double> likelihood(GridPos pos, int h) const {
    return {like_.data() + slab(pos, h), static_cast<size_t>(n_hyp_)};
  }
  std::span<const double> log_likelihood(GridPos pos, int h) const {
    return {log_like_.data() + slab(pos, h), static_cast<size_t>(n_hyp_)};
  }

  // Unclamped mean hit count under a hypothesis at a position.
  double mean_hits_at(GridPos pos, int hypothesis) const {
    return mu_[static_cast<size_t>(pos.y * nx_ + pos.x) * n_hyp_ + hypothesis];
  }

 private:
  size_t slab(GridPos pos, int h) const {
    return (static_cast<size_t>(pos.y * nx_ + pos.x) * (h_max_ + 1) + h) * n_hyp_;
  }

  int nx_, ny_, n_hyp_, h_max_;
  std::vector<double> mu_;        // [pos][hypothesis]
  std::vector<double> like_;      // [pos][h][hypothesis]
  std::vector<double> log_like_;  // ln of the above
};

}  // namespace ste

#endif
