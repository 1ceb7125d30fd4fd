#include "selfchain/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace selfchain {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kTwoPi = 6.283185307179586;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

}  // namespace

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) {
  if (std::isnan(x)) throw std::domain_error("std_normal_cdf: NaN argument");
  return 0.5 * std::erfc(-x / kSqrt2);
}

namespace {

// Acklam's rational approximation for the inverse normal CDF, lower half.
// Relative error of the raw estimate < 1.15e-9; a Newton step using
// std_normal_cdf takes it to near machine precision.
double inv_cdf_estimate_lower(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_inv_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("std_normal_inv_cdf: p outside (0,1)");
  // Reflect the upper half; 1-p is exact for p >= 0.5 and the lower-tail
  // complement keeps full relative precision near the edges.
  if (p > 0.5) return -std_normal_inv_cdf(1.0 - p);

  double x = inv_cdf_estimate_lower(p);
  if (x > -37.0) {  // pdf underflows beyond; raw estimate already meets contract there
    double err = 0.5 * std::erfc(-x / kSqrt2) - p;
    x -= err / std_normal_pdf(x);
  }
  return x;
}

namespace {

// Gauss-Legendre nodes/weights (half of each symmetric set), n = 6, 12, 20.
constexpr double kGlX6[3] = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969};
constexpr double kGlW6[3] = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910};
constexpr double kGlX12[6] = {-0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
                              -0.5873179542866175, -0.3678314989981802, -0.1252334085114689};
constexpr double kGlW12[6] = {0.04717533638651183, 0.1069393259953184, 0.1600783285433462,
                              0.2031674267230659,  0.2334925365383548, 0.2491470458134028};
constexpr double kGlX20[10] = {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
                               -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
                               -0.5108670019508271, -0.3737060887154195, -0.2277858511416451,
                               -0.07652652113349733};
constexpr double kGlW20[10] = {0.01761400713915212, 0.04060142980038694, 0.06267204833410907,
                               0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                               0.1316886384491766,  0.1420961093183820,  0.1491729864726037,
                               0.1527533871307258};

// Drezner & Wesolowsky (1990) / Genz (2004) BVND: P(X > h, Y > k) for a
// standard bivariate normal with correlation r. Short Gauss-Legendre rule on
// the asin(r) form for |r| < 0.925, the transformed high-correlation
// expansion otherwise.
double bvnd_upper(double h, double k, double r) {
  const double* gx;
  const double* gw;
  int lg;
  double ar = std::fabs(r);
  if (ar < 0.3) {
    gx = kGlX6;
    gw = kGlW6;
    lg = 3;
  } else if (ar < 0.75) {
    gx = kGlX12;
    gw = kGlW12;
    lg = 6;
  } else {
    gx = kGlX20;
    gw = kGlW20;
    lg = 10;
  }

  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    if (ar > 0.0) {
      double hs = 0.5 * (h * h + k * k);
      double asr = std::asin(r);
      for (int i = 0; i < lg; ++i) {
        for (int is = -1; is <= 1; is += 2) {
          double sn = std::sin(asr * (is * gx[i] + 1.0) / 2.0);
          bvn += gw[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
      }
      bvn *= asr / (2.0 * kTwoPi);
    }
    bvn += std_normal_cdf(-h) * std_normal_cdf(-k);
    return bvn;
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (ar < 1.0) {
    double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    double bs = (h - k) * (h - k);
    double c = (4.0 - hk) / 8.0;
    double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0) {
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    }
    if (-hk < 100.0) {
      double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * std_normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < lg; ++i) {
      for (int is = -1; is <= 1; is += 2) {
        double x = a * (is * gx[i] + 1.0);
        double xs = x * x;
        double rs = std::sqrt(1.0 - xs);
        double asr2 = -(bs / xs + hk) / 2.0;
        if (asr2 > -100.0) {
          bvn += a * gw[i] * std::exp(asr2) *
                 (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                  (1.0 + c * xs * (1.0 + d * xs)));
        }
      }
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) {
    bvn += std_normal_cdf(-std::max(h, k));
  } else {
    bvn = -bvn;
    if (k > h) bvn += std_normal_cdf(k) - std_normal_cdf(h);
  }
  return bvn;
}

}  // namespace

double bivariate_normal_cdf(double x, double y, double rho) {
  if (std::isnan(x) || std::isnan(y) || std::isnan(rho))
    throw std::domain_error("bivariate_normal_cdf: NaN argument");
  if (!(std::fabs(rho) < 1.0))
    throw std::domain_error("bivariate_normal_cdf: |rho| must be < 1");
  if (std::isinf(x) || std::isinf(y)) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (x == -inf || y == -inf) return 0.0;
    if (x == inf && y == inf) return 1.0;
    return x == inf ? std_normal_cdf(y) : std_normal_cdf(x);
  }
  double p = bvnd_upper(-x, -y, rho);
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return p;
}

McEstimate mc_estimate_from_count(std::uint64_t n_success, std::uint64_t n_scenarios,
                                  std::uint64_t seed) {
  if (n_scenarios == 0) throw std::invalid_argument("mc_estimate: zero scenarios");
  McEstimate e;
  e.mean = static_cast<double>(n_success) / static_cast<double>(n_scenarios);
  e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n_scenarios));
  e.n_scenarios = n_scenarios;
  e.seed = seed;
  return e;
}

McEstimate mc_estimate(std::span<const std::uint8_t> indicators, std::uint64_t seed) {
  if (indicators.empty()) throw std::invalid_argument("mc_estimate: empty indicator stream");
  std::uint64_t successes = 0;
  for (auto v : indicators) successes += (v != 0);
  return mc_estimate_from_count(successes, indicators.size(), seed);
}

}  // namespace selfchain
