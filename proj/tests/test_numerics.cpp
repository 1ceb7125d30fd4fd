#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "selfchain/csv.hpp"
#include "selfchain/numerics.hpp"

using namespace selfchain;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Phi(1), 20 digits from an arbitrary-precision erf evaluation.
constexpr double kPhiOne = 0.84134474606854294859;
}  // namespace

TEST_CASE("std_normal_cdf basic values") {
  CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std_normal_cdf(1.0) == doctest::Approx(kPhiOne).epsilon(1e-13));
  CHECK(std_normal_cdf(8.0) > 1.0 - 1e-14);
  CHECK(std_normal_cdf(8.0) <= 1.0);
  CHECK(std_normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-10));
  // symmetry
  for (double x : {0.3, 1.7, 2.9, 4.4}) {
    CHECK(std_normal_cdf(x) + std_normal_cdf(-x) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("std_normal_cdf monotone on random pairs") {
  RngStream rng(2024, 0);
  for (int i = 0; i < 10000; ++i) {
    double a = 16.0 * (rng.next_uniform() - 0.5);
    double b = 16.0 * (rng.next_uniform() - 0.5);
    double lo = std::min(a, b), hi = std::max(a, b);
    CHECK(std_normal_cdf(lo) <= std_normal_cdf(hi));
  }
}

TEST_CASE("std_normal_inv_cdf contract") {
  CHECK(std_normal_inv_cdf(0.5) == 0.0);
  CHECK(std_normal_inv_cdf(0.841344746) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std_normal_inv_cdf(kPhiOne) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std_normal_inv_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));

  // |Phi(result) - p| <= 1e-9 across the full open interval
  for (double p : {1e-300, 1e-12, 2.5e-3, 0.02425, 0.3, 0.5, 0.7, 0.97, 1.0 - 1e-12}) {
    double x = std_normal_inv_cdf(p);
    CHECK(std::fabs(std_normal_cdf(x) - p) <= 1e-9);
  }

  CHECK_THROWS_AS(std_normal_inv_cdf(0.0), std::domain_error);
  CHECK_THROWS_AS(std_normal_inv_cdf(1.0), std::domain_error);
  CHECK_THROWS_AS(std_normal_inv_cdf(-0.2), std::domain_error);
  CHECK_THROWS_AS(std_normal_inv_cdf(1.2), std::domain_error);
}

TEST_CASE("inverse CDF round trip on [-6,6]") {
  double worst = 0.0;
  for (int i = 0; i <= 1200; ++i) {
    double x = -6.0 + i * 0.01;
    double rt = std_normal_inv_cdf(std_normal_cdf(x));
    worst = std::max(worst, std::fabs(rt - x));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("bivariate_normal_cdf reference values") {
  // closed form at the origin: 1/4 + asin(rho)/(2 pi)
  for (double rho : {-0.95, -0.5, 0.0, 0.3, 0.5, 0.9, 0.99}) {
    double expected = 0.25 + std::asin(rho) / (2.0 * M_PI);
    CHECK(bivariate_normal_cdf(0.0, 0.0, rho) == doctest::Approx(expected).epsilon(1e-13));
  }

  // high-precision quadrature references
  struct Ref {
    double x, y, rho, value;
  };
  const std::vector<Ref> refs = {
      {0.5, -0.3, 0.35, 0.31052955390272385},
      {1.2, 0.8, -0.6, 0.67475320887876603},
      {-1.5, -2.0, 0.95, 0.022100008764184883},
      {2.0, 2.0, 0.999, 0.97628684304427668},
      {-0.3, 0.4, -0.999, 0.037584304564966146},
      {0.0, 0.0, 0.5, 1.0 / 3.0},
      {3.0, -3.0, 0.7, 0.0013498980316298962},
      {-1.1015196284987503, -1.1015196284987503, 0.9, 0.096608796987547837},
      {2.057869592336305, 2.057869592336305, 0.9, 0.97186638198665224},
      {0.1, 0.2, 0.99, 0.53194146469311088},
      {-2.5, 1.3, -0.95, 3.5046928417378341e-7},
      {0.0, 1.0, 0.926, 0.4997989815455071},
  };
  for (const auto& r : refs) {
    CHECK(bivariate_normal_cdf(r.x, r.y, r.rho) ==
          doctest::Approx(r.value).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("bivariate_normal_cdf reductions and domain") {
  // rho = 0 factorizes
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      double x = -3.0 + i * 0.3;
      double y = -3.0 + j * 0.3;
      CHECK(std::fabs(bivariate_normal_cdf(x, y, 0.0) - std_normal_cdf(x) * std_normal_cdf(y)) <=
            1e-9);
    }
  }
  // +-infinity reduce analytically
  CHECK(bivariate_normal_cdf(0.7, kInf, 0.4) == doctest::Approx(std_normal_cdf(0.7)));
  CHECK(bivariate_normal_cdf(kInf, -0.2, 0.4) == doctest::Approx(std_normal_cdf(-0.2)));
  CHECK(bivariate_normal_cdf(-kInf, 0.3, 0.4) == 0.0);
  CHECK(bivariate_normal_cdf(0.3, -kInf, -0.8) == 0.0);
  CHECK(bivariate_normal_cdf(kInf, kInf, 0.4) == 1.0);
  // symmetry in (x,y)
  RngStream rng(11, 3);
  for (int i = 0; i < 200; ++i) {
    double x = 8.0 * (rng.next_uniform() - 0.5);
    double y = 8.0 * (rng.next_uniform() - 0.5);
    double rho = 1.96 * (rng.next_uniform() - 0.5);
    CHECK(std::fabs(bivariate_normal_cdf(x, y, rho) - bivariate_normal_cdf(y, x, rho)) <= 1e-12);
  }
  CHECK_THROWS_AS(bivariate_normal_cdf(0.0, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bivariate_normal_cdf(0.0, 0.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(bivariate_normal_cdf(0.0, 0.0, 1.5), std::domain_error);
}

TEST_CASE("rng reproducibility and stream independence") {
  RngStream a(123456789, 42);
  RngStream b(123456789, 42);
  for (int i = 0; i < 10000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }

  // distinct stream ids decorrelate
  RngStream s0(7, 0), s1(7, 1);
  const int n = 100000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    double x = s0.next_uniform(), y = s1.next_uniform();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  double cov = sxy / n - (sx / n) * (sy / n);
  double vx = sxx / n - (sx / n) * (sx / n);
  double vy = syy / n - (sy / n) * (sy / n);
  double corr = cov / std::sqrt(vx * vy);
  CHECK(std::fabs(corr) < 0.01);

  // uniforms stay strictly inside (0,1)
  RngStream u(99, 5);
  for (int i = 0; i < 100000; ++i) {
    double v = u.next_uniform();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("mc_estimate") {
  std::vector<std::uint8_t> ones(100, 1);
  auto e1 = mc_estimate(ones, 9);
  CHECK(e1.mean == 1.0);
  CHECK(e1.std_error == 0.0);
  CHECK(e1.n_scenarios == 100);
  CHECK(e1.seed == 9);

  std::vector<std::uint8_t> zeros(100, 0);
  auto e0 = mc_estimate(zeros, 0);
  CHECK(e0.mean == 0.0);
  CHECK(e0.std_error == 0.0);

  std::vector<std::uint8_t> alt(1000);
  for (int i = 0; i < 1000; ++i) alt[i] = static_cast<std::uint8_t>(i % 2);
  auto ea = mc_estimate(alt);
  CHECK(ea.mean == doctest::Approx(0.5));
  CHECK(ea.std_error == doctest::Approx(0.015811388300841896).epsilon(1e-12));

  CHECK_THROWS_AS(mc_estimate(std::span<const std::uint8_t>{}), std::invalid_argument);
  CHECK_THROWS_AS(mc_estimate_from_count(0, 0), std::invalid_argument);
}

TEST_CASE("format_double round-trips every value") {
  RngStream rng(606, 0);
  std::vector<double> values = {0.0, 1.0, -1.0, 0.1, 1e-300, 1e300, 0.37521422724648177,
                                5e-324, 1.0 - 0x1.0p-53};
  for (int i = 0; i < 2000; ++i) {
    double mag = std::exp(40.0 * (rng.next_uniform() - 0.5));
    values.push_back((rng.next_uniform() - 0.5) * mag);
  }
  for (double v : values) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}
