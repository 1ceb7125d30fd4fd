#include "selfchain/samplers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace selfchain {

namespace {

constexpr double kPi = 3.141592653589793;
// theta this close to 1 short-circuits to independent uniforms; the stable
// sampler degenerates as alpha = 1/theta -> 1.
constexpr double kThetaIndependenceBand = 1.0 + 1e-9;

// Keep sampler output strictly inside (0,1).
double clamp_open_unit(double u) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - 0x1.0p-53;
  if (u < lo) return lo;
  if (u > hi) return hi;
  return u;
}

}  // namespace

// Kanter (1975) / Chambers-Mallows-Stuck representation of the one-sided
// stable law, normalized so E[exp(-z S)] = exp(-z^alpha):
//   S = sin(a U) sin((1-a)U)^((1-a)/a) / (sin(U)^(1/a) E^((1-a)/a)),
// U uniform on (0,pi), E unit exponential.
double sample_positive_stable(double alpha, RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("sample_positive_stable: alpha must lie in (0,1)");
  double u = kPi * rng.next_uniform();
  double e = rng.next_exponential();
  double ratio = (1.0 - alpha) / alpha;
  return std::sin(alpha * u) * std::pow(std::sin((1.0 - alpha) * u) / e, ratio) /
         std::pow(std::sin(u), 1.0 / alpha);
}

std::vector<double> sample_gumbel_copula(double theta, int n, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("sample_gumbel_copula: n must be >= 2");
  if (!(theta >= 1.0)) throw std::domain_error("sample_gumbel_copula: theta must be >= 1");
  std::vector<double> out(n);
  if (theta <= kThetaIndependenceBand) {
    for (auto& v : out) v = rng.next_uniform();
    return out;
  }
  double s = sample_positive_stable(1.0 / theta, rng);
  double inv_theta = 1.0 / theta;
  for (auto& v : out) {
    double e = rng.next_exponential();
    v = clamp_open_unit(std::exp(-std::pow(e / s, inv_theta)));
  }
  return out;
}

// Common-shock construction with per-margin total rate normalized to 1:
// tau_i = min(E_i/(1-alpha_i), E12/alpha_i), U_i = exp(-tau_i). The shared
// E12 produces the singular mass on {U1 = U2}.
std::array<double, 2> sample_mo_copula(double alpha1, double alpha2, RngStream& rng) {
  if (!(alpha1 >= 0.0 && alpha1 <= 1.0) || !(alpha2 >= 0.0 && alpha2 <= 1.0))
    throw std::domain_error("sample_mo_copula: alphas must lie in [0,1]");
  constexpr double inf = std::numeric_limits<double>::infinity();
  double e1 = rng.next_exponential();
  double e2 = rng.next_exponential();
  double e12 = rng.next_exponential();
  double t1 = std::min(alpha1 < 1.0 ? e1 / (1.0 - alpha1) : inf,
                       alpha1 > 0.0 ? e12 / alpha1 : inf);
  double t2 = std::min(alpha2 < 1.0 ? e2 / (1.0 - alpha2) : inf,
                       alpha2 > 0.0 ? e12 / alpha2 : inf);
  return {clamp_open_unit(std::exp(-t1)), clamp_open_unit(std::exp(-t2))};
}

std::vector<double> sample_gaussian_copula(const CopulaSpec& gaussian_spec, RngStream& rng) {
  if (gaussian_spec.family() != Family::gaussian)
    throw std::invalid_argument("sample_gaussian_copula: spec is not Gaussian");
  CopulaSampler sampler(gaussian_spec);
  return sampler.draw(rng);
}

std::vector<double> to_arrival_times(std::span<const double> u, std::span<const double> lambdas) {
  if (u.size() != lambdas.size())
    throw std::invalid_argument("to_arrival_times: size mismatch between u and lambdas");
  std::vector<double> tau(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0 && u[i] < 1.0))
      throw std::domain_error("to_arrival_times: u must lie strictly inside (0,1)");
    if (!(lambdas[i] > 0.0)) throw std::domain_error("to_arrival_times: lambda must be > 0");
    tau[i] = -std::log(u[i]) / lambdas[i];
  }
  return tau;
}

CopulaSampler::CopulaSampler(CopulaSpec spec) : spec_(std::move(spec)) {
  if (spec_.family() == Family::gumbel_hougaard) {
    theta_is_one_ = spec_.theta() <= kThetaIndependenceBand;
    inv_theta_ = 1.0 / spec_.theta();
  }
}

void CopulaSampler::draw(std::span<double> out, RngStream& rng) const {
  const int n = spec_.dim();
  if (static_cast<int>(out.size()) != n)
    throw std::invalid_argument("CopulaSampler::draw: output size mismatch");
  switch (spec_.family()) {
    case Family::independence:
      for (auto& v : out) v = rng.next_uniform();
      return;
    case Family::comonotone: {
      double u = rng.next_uniform();
      for (auto& v : out) v = u;
      return;
    }
    case Family::gumbel_hougaard: {
      if (theta_is_one_) {
        for (auto& v : out) v = rng.next_uniform();
        return;
      }
      double s = sample_positive_stable(inv_theta_, rng);
      for (auto& v : out)
        v = clamp_open_unit(std::exp(-std::pow(rng.next_exponential() / s, inv_theta_)));
      return;
    }
    case Family::marshall_olkin: {
      auto uv = sample_mo_copula(spec_.alpha1(), spec_.alpha2(), rng);
      out[0] = uv[0];
      out[1] = uv[1];
      return;
    }
    case Family::gaussian: {
      const auto& l = spec_.cholesky();
      constexpr int kStack = 16;
      double zbuf[kStack];
      std::vector<double> zheap;
      double* z = zbuf;
      if (n > kStack) {
        zheap.resize(n);
        z = zheap.data();
      }
      for (int i = 0; i < n; ++i) z[i] = rng.next_normal();
      for (int i = n - 1; i >= 0; --i) {
        double acc = 0.0;
        for (int k = 0; k <= i; ++k) acc += l[static_cast<std::size_t>(i) * n + k] * z[k];
        out[i] = clamp_open_unit(std_normal_cdf(acc));
      }
      return;
    }
  }
  throw std::logic_error("CopulaSampler::draw: unknown family");
}

std::vector<double> CopulaSampler::draw(RngStream& rng) const {
  std::vector<double> out(spec_.dim());
  draw(out, rng);
  return out;
}

}  // namespace selfchain
