#include <cmath>
#include <stdexcept>

#include "ste/plume.hpp"

namespace ste {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Ascending series, valid for small and moderate z:
//   I0(z) = sum_k t_k,                    t_k = (z^2/4)^k / (k!)^2
//   K0(z) = -(ln(z/2) + gamma) I0(z) + sum_k t_k H_k,   H_k = 1 + 1/2 + ... + 1/k
// All terms are positive; the only cancellation is between the two outer
// parts, which costs at most ~1e-12 absolute near the series/asymptotic
// crossover.
double k0_series(double z) {
  const double q = 0.25 * z * z;
  double term = 1.0;  // t_0
  double i0 = 1.0;
  double harmonic = 0.0;
  double s = 0.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    i0 += term;
    s += term * harmonic;
    if (term * (harmonic + 1.0) < 1e-18 * (i0 + s)) break;
  }
  return -(std::log(0.5 * z) + kEulerGamma) * i0 + s;
}

// Asymptotic expansion for large z:
//   K0(z) ~ sqrt(pi/(2z)) e^{-z} [1 + sum_k a_k],  a_k = prod_j -(2j-1)^2 / (8z) / j
// The series is summed until terms stop shrinking; the truncation error is
// bounded by the first omitted term.
double k0_asymptotic(double z) {
  double sum = 1.0;
  double term = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 40; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(odd * odd) / (8.0 * z * k);
    if (std::abs(term) >= std::abs(prev)) break;  // divergent tail reached
    sum += term;
    prev = term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return std::sqrt(M_PI / (2.0 * z)) * std::exp(-z) * sum;
}

}  // namespace

double bessel_k0(double z) {
  if (!(z > 0.0)) throw std::domain_error("bessel_k0: argument must be > 0");
  if (z <= 8.0) return k0_series(z);
  return k0_asymptotic(z);  // underflows to 0 for z beyond ~745
}

}  // namespace ste
