#ifndef STE_BELIEF_HPP
#define STE_BELIEF_HPP

#include <span>
#include <vector>

#include "ste/env_params.hpp"
#include "ste/likelihood.hpp"

namespace ste {

// Normalized probability tensor over all (xs, ys, phi) hypotheses, laid out
// in hypothesis-index order: (flux_index * ny + ys) * nx + xs.
class Belief {
 public:
  Belief() = default;
  Belief(int nx, int ny, int n_fluxes, std::vector<double> probs);

  static Belief uniform(const EnvParams& params);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int n_fluxes() const { return n_phi_; }
  int size() const { return static_cast<int>(p_.size()); }

  double operator[](int hypothesis) const { return p_[static_cast<size_t>(hypothesis)]; }
  double at(int xs, int ys, int flux_index) const {
    return p_[static_cast<size_t>((flux_index * ny_ + ys) * nx_ + xs)];
  }
  std::span<const double> probs() const { return p_; }
  std::span<double> mutable_probs() { return p_; }

 private:
  int nx_ = 0, ny_ = 0, n_phi_ = 0;
  std::vector<double> p_;
};

struct BayesUpdate {
  Belief posterior;
  double evidence;  // Pr(h) under the prior, for diagnostics
};

// Posterior(theta) proportional to Pr(h | theta, pos) * prior(theta).
// Throws UpdateError if the evidence vanishes (observation impossible under
// the model; with tail-lumped likelihoods this signals a bug).
BayesUpdate bayes_update(const Belief& prior, GridPos pos, int h,
                         const LikelihoodCache& cache);

// Information entropy in nats, with 0 ln 0 := 0.
double entropy(const Belief& belief);
double entropy(std::span<const double> probs);

enum class Axis { xs = 0, ys = 1, phi = 2 };

// Sums the tensor over the other two axes.
std::vector<double> marginal(const Belief& belief, Axis axis);

// Discrete ranked probability score: squared distance between the marginal's
// CDF and the step function at the truth. Zero iff the marginal is a point
// mass at truth_index. Unnormalized; relative scores cancel any constant.
double drps(std::span<const double> marginal, int truth_index);

struct MapEstimate {
  SourceTerm term;
  double probability;
  int hypothesis;  // linear index, also the tie-break key (smallest wins)
};

MapEstimate map_estimate(const Belief& belief, const EnvParams& params);

}  // namespace ste

#endif
