#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace selfchain {

/// Standard normal density.
double std_normal_pdf(double x);

/// Standard normal CDF. Absolute error below 1e-14 over the full double range.
double std_normal_cdf(double x);

/// Inverse standard normal CDF on (0,1).
/// Rational initial estimate refined by one Newton step; |Phi(result) - p| <= 1e-9.
/// Throws std::domain_error for p outside (0,1).
double std_normal_inv_cdf(double p);

/// P(X <= x, Y <= y) for a standard bivariate normal with correlation rho,
/// |rho| < 1. +-infinity arguments reduce analytically. Throws std::domain_error
/// for |rho| >= 1 or NaN input.
double bivariate_normal_cdf(double x, double y, double rho);

/// Counter-based pseudo-random stream. The sequence is a pure function of
/// (seed, stream_id, draw index), so distinct stream ids can be handed to
/// parallel workers and any partition of the index space reproduces the same
/// variates. One stream must not be shared across concurrent tasks.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id), base_(derive(seed, stream_id)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return mix(base_ + counter_);
  }

  /// Uniform variate strictly inside (0,1).
  double next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Unit-rate exponential variate.
  double next_exponential() noexcept { return -std::log(next_uniform()); }

  /// Standard normal variate via the inverse CDF (keeps streams splittable).
  double next_normal() { return std_normal_inv_cdf(next_uniform()); }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t a = mix(seed + 0x9E3779B97F4A7C15ULL);
    std::uint64_t b = mix(stream + 0xBF58476D1CE4E5B9ULL);
    return mix(a ^ (b + 0x94D049BB133111EBULL + (a << 6) + (a >> 2)));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Monte Carlo probability estimate from Bernoulli indicators.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_scenarios = 0;
  std::uint64_t seed = 0;
};

/// Estimate from a raw indicator sequence. Throws std::invalid_argument on empty input.
McEstimate mc_estimate(std::span<const std::uint8_t> indicators, std::uint64_t seed = 0);

/// Estimate from a success count. stderr = sqrt(mean(1-mean)/n).
McEstimate mc_estimate_from_count(std::uint64_t n_success, std::uint64_t n_scenarios,
                                  std::uint64_t seed = 0);

}  // namespace selfchain
