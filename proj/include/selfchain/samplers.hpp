#pragma once

#include <array>
#include <span>
#include <vector>

#include "selfchain/copula.hpp"
#include "selfchain/numerics.hpp"

namespace selfchain {

/// One draw of a positive strictly stable variate with Laplace transform
/// E[exp(-z S)] = exp(-z^alpha), 0 < alpha < 1.
double sample_positive_stable(double alpha, RngStream& rng);

/// One draw of the Gumbel-Hougaard copula via its positive-stable frailty.
std::vector<double> sample_gumbel_copula(double theta, int n, RngStream& rng);

/// One draw of the bivariate Marshall-Olkin copula via common shocks.
std::array<double, 2> sample_mo_copula(double alpha1, double alpha2, RngStream& rng);

/// One draw of the Gaussian copula for the given spec.
std::vector<double> sample_gaussian_copula(const CopulaSpec& gaussian_spec, RngStream& rng);

/// Maps copula uniforms to exponential arrival times, tau_i = -ln(u_i)/lambda_i.
/// Throws std::domain_error if any u_i is not strictly inside (0,1).
std::vector<double> to_arrival_times(std::span<const double> u, std::span<const double> lambdas);

/// Reusable sampler for a validated spec; per-spec setup (factorizations,
/// derived parameters) happens once. Reentrant given distinct RngStreams.
class CopulaSampler {
 public:
  explicit CopulaSampler(CopulaSpec spec);

  int dim() const noexcept { return spec_.dim(); }
  const CopulaSpec& spec() const noexcept { return spec_; }

  void draw(std::span<double> out, RngStream& rng) const;
  std::vector<double> draw(RngStream& rng) const;

 private:
  CopulaSpec spec_;
  double inv_theta_ = 0.0;  // Gumbel
  bool theta_is_one_ = false;
};

}  // namespace selfchain
