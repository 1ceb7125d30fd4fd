#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "selfchain/chaining.hpp"
#include "selfchain/copula.hpp"

using namespace selfchain;

namespace {

// Frozen independently of this library (arbitrary-precision quadrature,
// Owen's-T closed form and large-sample MC all agree):
//   Phi2(Phi^-1(e^-2), Phi^-1(e^-2), 0.9)        = 0.0966087969875479
//   Phi2(Phi^-1(e^-0.02), Phi^-1(e^-0.02), 0.9)  = 0.9718663819866521
constexpr double kGaussOneShot = 0.0966087969875479;
constexpr double kGaussPerPeriod = 0.9718663819866521;
constexpr double kGaussMultiStep = 0.0576309743716100;  // per-period^100

ArrivalTimeModel benchmark_model(CopulaSpec spec) {
  return ArrivalTimeModel({0.02, 0.02}, std::move(spec));
}

}  // namespace

TEST_CASE("self_chain_residual") {
  const double half[2] = {0.5, 0.5};
  CHECK(self_chain_residual(CopulaSpec::gumbel_hougaard(2.0), half, 2.0) <= 1e-14);

  const double pt46[2] = {0.4, 0.6};
  CHECK(self_chain_residual(CopulaSpec::marshall_olkin(0.3, 0.7), pt46, 3.0) <= 1e-14);

  const double e02[2] = {std::exp(-0.02), std::exp(-0.02)};
  double r = self_chain_residual(CopulaSpec::gaussian(0.9), e02, 100.0);
  CHECK(r == doctest::Approx(kGaussOneShot - kGaussMultiStep).epsilon(1e-9));
  CHECK(r > 1e-3);

  const double boundary[2] = {0.0, 0.5};
  CHECK_THROWS_AS(self_chain_residual(CopulaSpec::independence(2), boundary, 2.0),
                  std::domain_error);
  CHECK_THROWS_AS(self_chain_residual(CopulaSpec::independence(2), half, 0.0),
                  std::domain_error);
}

TEST_CASE("max_residual_grid") {
  auto grid = default_residual_grid(2);
  CHECK(grid.size() == 19 * 19);
  const auto& ks = default_residual_exponents();

  auto rep5 = max_residual_grid(CopulaSpec::gumbel_hougaard(5.0), grid, ks);
  CHECK(rep5.max_residual <= 1e-10);
  CHECK(rep5.grid_size == static_cast<int>(grid.size() * ks.size()));

  auto repi = max_residual_grid(CopulaSpec::independence(2), grid, ks);
  CHECK(repi.max_residual <= 1e-12);

  const std::vector<double> k_small = {2.0, 10.0};
  auto repg = max_residual_grid(CopulaSpec::gaussian(0.5), grid, k_small);
  CHECK(repg.max_residual > 1e-3);
  CHECK(repg.argmax_point.size() == 2);
  CHECK((repg.argmax_k == 2.0 || repg.argmax_k == 10.0));

  CHECK_THROWS_AS(max_residual_grid(CopulaSpec::independence(2), {}, ks), std::invalid_argument);
}

TEST_CASE("log_copula") {
  const double v12[2] = {-1.0, -2.0};
  CHECK(log_copula(CopulaSpec::independence(2), v12) == doctest::Approx(-3.0).epsilon(1e-15));

  const double v11[2] = {-1.0, -1.0};
  CHECK(log_copula(CopulaSpec::gumbel_hougaard(2.0), v11) ==
        doctest::Approx(-1.4142135623730951).epsilon(1e-13));

  const double v0[2] = {0.0, 0.0};
  for (const auto& s : {CopulaSpec::gumbel_hougaard(3.0), CopulaSpec::gaussian(0.4),
                        CopulaSpec::comonotone(2), CopulaSpec::marshall_olkin(0.5, 0.5)}) {
    CHECK(log_copula(s, v0) == 0.0);
  }

  const double vpos[2] = {0.5, -1.0};
  CHECK_THROWS_AS(log_copula(CopulaSpec::independence(2), vpos), std::domain_error);
  const double vinf[2] = {-std::numeric_limits<double>::infinity(), -1.0};
  CHECK_THROWS_AS(log_copula(CopulaSpec::independence(2), vinf), std::domain_error);
  // Gaussian value underflows to zero far in the tail: outside L's domain
  const double vdeep[2] = {-800.0, -800.0};
  CHECK_THROWS_AS(log_copula(CopulaSpec::gaussian(0.9), vdeep), std::domain_error);

  // consistency with the linear-space evaluator where both are defined
  RngStream rng(3, 3);
  for (const auto& s : {CopulaSpec::gumbel_hougaard(2.5), CopulaSpec::marshall_olkin(0.4, 0.8),
                        CopulaSpec::gaussian(0.6), CopulaSpec::independence(2),
                        CopulaSpec::comonotone(2)}) {
    for (int i = 0; i < 300; ++i) {
      double u[2] = {0.02 + 0.97 * rng.next_uniform(), 0.02 + 0.97 * rng.next_uniform()};
      double v[2] = {std::log(u[0]), std::log(u[1])};
      CHECK(std::fabs(log_copula(s, v) - std::log(copula_cdf(s, u))) <= 1e-10);
    }
  }
}

TEST_CASE("homogeneity_residual") {
  const double v[2] = {-0.5, -1.5};
  CHECK(homogeneity_residual(CopulaSpec::gumbel_hougaard(3.0), v, 2.0) <= 1e-12);
  CHECK(homogeneity_residual(CopulaSpec::independence(2), v, 7.3) <= 1e-14);

  const double vp[2] = {-0.02, -0.02};
  double r = homogeneity_residual(CopulaSpec::gaussian(0.9), vp, 100.0);
  CHECK(r > 0.1);
  // equals |ln C(u^100) - 100 ln C(u)| = ln(one-shot / multi-step)
  CHECK(r == doctest::Approx(std::log(kGaussOneShot / kGaussMultiStep)).epsilon(1e-7));
}

TEST_CASE("pde_residual") {
  CHECK(std::fabs(pde_residual(CopulaSpec::gumbel_hougaard(2.0), 0.5, 0.5, 1e-5)) <= 1e-6);
  CHECK(std::fabs(pde_residual(CopulaSpec::independence(2), 0.3, 0.7, 1e-5)) <= 1e-7);
  double g = pde_residual(CopulaSpec::gaussian(0.9), 0.5, 0.5, 1e-5);
  CHECK(std::fabs(g) > 1e-3);  // also clears the 1e-4 witness threshold
  CHECK(g == doctest::Approx(0.0166080618).epsilon(1e-4));

  CHECK_THROWS_AS(pde_residual(CopulaSpec::independence(2), 0.5, 0.5, 0.6), std::domain_error);
  CHECK_THROWS_AS(pde_residual(CopulaSpec::gumbel_hougaard(2.0, 3), 0.5, 0.5, 1e-5),
                  std::invalid_argument);
}

TEST_CASE("one-shot and multi-step analytic survival") {
  auto indep = benchmark_model(CopulaSpec::independence(2));
  CHECK(one_shot_survival(indep, 100, 1.0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-13));
  CHECK(multi_step_survival(indep, 100, 1.0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));

  auto como = benchmark_model(CopulaSpec::comonotone(2));
  CHECK(one_shot_survival(como, 100, 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-13));

  auto gauss = benchmark_model(CopulaSpec::gaussian(0.9));
  double os = one_shot_survival(gauss, 100, 1.0);
  double ms = multi_step_survival(gauss, 100, 1.0);
  CHECK(os == doctest::Approx(kGaussOneShot).epsilon(1e-10));
  CHECK(std::fabs(os - 0.0969) <= 5e-4);
  CHECK(ms == doctest::Approx(kGaussMultiStep).epsilon(1e-9));

  // self-chaining families agree between the two procedures
  for (auto spec : {CopulaSpec::gumbel_hougaard(2.0), CopulaSpec::marshall_olkin(0.4, 0.7),
                    CopulaSpec::comonotone(2)}) {
    auto m = benchmark_model(std::move(spec));
    for (int n : {2, 10, 100}) {
      CHECK(std::fabs(one_shot_survival(m, n, 1.0) - multi_step_survival(m, n, 1.0)) <= 1e-10);
    }
  }

  CHECK_THROWS_AS(one_shot_survival(indep, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(multi_step_survival(indep, 10, 0.0), std::invalid_argument);
}

TEST_CASE("monotone dependence decay for the Gaussian copula") {
  auto gauss = benchmark_model(CopulaSpec::gaussian(0.9));
  const double horizon = 100.0;
  std::vector<int> ns = {1, 2, 10, 100};
  std::vector<double> vals;
  for (int n : ns) vals.push_back(multi_step_survival(gauss, n, horizon / n));
  CHECK(vals[0] == doctest::Approx(one_shot_survival(gauss, 100, 1.0)).epsilon(1e-12));
  for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i] < vals[i - 1]);
  CHECK(vals.back() == doctest::Approx(kGaussMultiStep).epsilon(1e-9));
  // stays above the independence floor
  CHECK(vals.back() > std::exp(-4.0));
}

TEST_CASE("monte carlo one-shot and multi-step") {
  auto g2 = benchmark_model(CopulaSpec::gumbel_hougaard(2.0));
  const std::uint64_t n = 200000;
  auto os = mc_one_shot(g2, 100, 1.0, n, RngStream(42, 0));
  auto ms = mc_multi_step(g2, 100, 1.0, n, RngStream(42, n + 1));
  double analytic = one_shot_survival(g2, 100, 1.0);
  CHECK(std::fabs(os.mean - analytic) <= 3.0 * os.std_error);
  CHECK(std::fabs(ms.mean - analytic) <= 3.0 * ms.std_error);
  // the two procedures agree within joint error
  CHECK(std::fabs(os.mean - ms.mean) <=
        3.0 * std::sqrt(os.std_error * os.std_error + ms.std_error * ms.std_error));
  CHECK(os.n_scenarios == n);
  CHECK(os.seed == 42);
  // stderr follows the Bernoulli formula
  CHECK(os.std_error ==
        doctest::Approx(std::sqrt(os.mean * (1.0 - os.mean) / static_cast<double>(n))));

  auto indep = benchmark_model(CopulaSpec::independence(2));
  auto msi = mc_multi_step(indep, 100, 1.0, n, RngStream(7, 0));
  CHECK(std::fabs(msi.mean - std::exp(-4.0)) <= 3.0 * msi.std_error);

  auto como = benchmark_model(CopulaSpec::comonotone(2));
  auto osc = mc_one_shot(como, 100, 1.0, n, RngStream(8, 0));
  CHECK(std::fabs(osc.mean - std::exp(-2.0)) <= 3.0 * osc.std_error);

  CHECK_THROWS_AS(mc_one_shot(g2, 100, 1.0, 0, RngStream(1, 0)), std::invalid_argument);
}

TEST_CASE("worker count never changes monte carlo results") {
  auto gauss = benchmark_model(CopulaSpec::gaussian(0.9));
  const std::uint64_t n = 5000;
  auto a = mc_one_shot(gauss, 10, 1.0, n, RngStream(99, 0), 1);
  auto b = mc_one_shot(gauss, 10, 1.0, n, RngStream(99, 0), 2);
  auto c = mc_one_shot(gauss, 10, 1.0, n, RngStream(99, 0), 4);
  CHECK(a.mean == b.mean);
  CHECK(a.mean == c.mean);
  auto ma = mc_multi_step(gauss, 10, 1.0, n, RngStream(99, 0), 1);
  auto mb = mc_multi_step(gauss, 10, 1.0, n, RngStream(99, 0), 3);
  CHECK(ma.mean == mb.mean);
}

TEST_CASE("max_stable_transform") {
  // fixed point for self-chaining specs
  auto g2 = CopulaSpec::gumbel_hougaard(2.0);
  auto t4 = max_stable_transform(g2, 4.0);
  for (double u = 0.1; u < 1.0; u += 0.1) {
    for (double v = 0.1; v < 1.0; v += 0.1) {
      const double pt[2] = {u, v};
      CHECK(std::fabs(t4(pt) - copula_cdf(g2, pt)) <= 1e-12);
    }
  }

  auto indep = CopulaSpec::independence(2);
  auto t7 = max_stable_transform(indep, 7.0);
  const double pt[2] = {0.2, 0.4};
  CHECK(t7(pt) == doctest::Approx(0.08).epsilon(1e-13));

  // Gaussian is not a fixed point: at the e^-0.02 diagonal with k = 100 the
  // transformed value is one_shot^(1/100), the original is per-period C
  auto g9 = CopulaSpec::gaussian(0.9);
  auto t100 = max_stable_transform(g9, 100.0);
  const double e02[2] = {std::exp(-0.02), std::exp(-0.02)};
  double transformed = t100(e02);
  double original = copula_cdf(g9, e02);
  CHECK(transformed == doctest::Approx(0.976900128526226).epsilon(1e-9));
  CHECK(original == doctest::Approx(kGaussPerPeriod).epsilon(1e-12));
  CHECK(transformed - original > 0.004);

  CHECK_THROWS_AS(max_stable_transform(g9, 0.0), std::domain_error);
}

TEST_CASE("chain_compare assembles a consistent report") {
  auto gauss = benchmark_model(CopulaSpec::gaussian(0.9));
  ChainReport rep = chain_compare(gauss, 10, 1.0, 20000, 4242, 2);
  CHECK(rep.n_periods == 10);
  CHECK(rep.period_length == 1.0);
  CHECK(rep.gap == rep.one_shot_analytic - rep.multi_step_analytic);
  CHECK(rep.one_shot_analytic == doctest::Approx(one_shot_survival(gauss, 10, 1.0)));
  CHECK(rep.multi_step_analytic == doctest::Approx(multi_step_survival(gauss, 10, 1.0)));
  CHECK(std::fabs(rep.one_shot_mc.mean - rep.one_shot_analytic) <= 4.0 * rep.one_shot_mc.std_error);
  CHECK(std::fabs(rep.multi_step_mc.mean - rep.multi_step_analytic) <=
        4.0 * rep.multi_step_mc.std_error);
  CHECK(rep.one_shot_mc.seed == 4242);

  auto j = rep.to_json();
  CHECK(j.contains("one_shot_analytic"));
  CHECK(j.contains("gap"));
  CHECK(j["one_shot_mc"].contains("stderr"));
  CHECK(j["N"] == 10);

  // gumbel: gap vanishes
  auto g2 = benchmark_model(CopulaSpec::gumbel_hougaard(2.0));
  ChainReport rg = chain_compare(g2, 100, 1.0, 1000, 1, 1);
  CHECK(std::fabs(rg.gap) <= 1e-10);

  // one-row CSV forms
  auto count_commas = [](const std::string& s) {
    return std::count(s.begin(), s.end(), ',');
  };
  CHECK(count_commas(rep.csv_row()) == count_commas(ChainReport::csv_header()));

  auto grid = default_residual_grid(2);
  auto rr = max_residual_grid(CopulaSpec::gaussian(0.9), grid, default_residual_exponents());
  std::string row = rr.csv_row();
  CHECK(row.find('"') != std::string::npos);  // the witness point is quoted
  auto jr = rr.to_json();
  CHECK(jr["max_residual"].get<double>() == rr.max_residual);
  CHECK(jr["argmax_point"].size() == 2);
}

TEST_CASE("characterization equivalence on the default grid") {
  auto grid = default_residual_grid(2);
  const auto& ks = default_residual_exponents();

  // self-chaining families: identity, homogeneity and PDE all vanish
  std::vector<CopulaSpec> chaining = {
      CopulaSpec::gumbel_hougaard(2.0), CopulaSpec::gumbel_hougaard(20.0),
      CopulaSpec::marshall_olkin(0.2, 0.5), CopulaSpec::marshall_olkin(0.5, 1.0),
      CopulaSpec::independence(2),          CopulaSpec::comonotone(2)};
  for (const auto& s : chaining) {
    CAPTURE(family_name(s.family()));
    double worst_rel = 0.0, worst_h = 0.0, worst_pde = 0.0;
    for (const auto& pt : grid) {
      for (double k : ks) {
        double uk[2] = {std::pow(pt[0], k), std::pow(pt[1], k)};
        double a = copula_cdf(s, uk);
        double b = std::pow(copula_cdf(s, pt), k);
        if (std::max(a, b) > 0.0)
          worst_rel = std::max(worst_rel, std::fabs(a - b) / std::max(a, b));
        double v[2] = {std::log(pt[0]), std::log(pt[1])};
        worst_h = std::max(worst_h, homogeneity_residual(s, v, k));
      }
      worst_pde = std::max(worst_pde, std::fabs(pde_residual(s, pt[0], pt[1], 1e-5)));
    }
    CHECK(worst_rel <= 1e-10);
    CHECK(worst_h <= 1e-10);
    CHECK(worst_pde <= 1e-6);
  }

  // Gaussian: the identity and homogeneity characterizations agree pointwise
  // (relative identity residual = 1 - exp(-log residual)), and the violation
  // is witnessed somewhere on the grid
  for (double rho : {0.3, 0.5, 0.9}) {
    CopulaSpec s = CopulaSpec::gaussian(rho);
    double max_abs = 0.0;
    for (const auto& pt : grid) {
      for (double k : ks) {
        double uk[2] = {std::pow(pt[0], k), std::pow(pt[1], k)};
        double a = copula_cdf(s, uk);
        double b = std::pow(copula_cdf(s, pt), k);
        max_abs = std::max(max_abs, std::fabs(a - b));
        if (a <= 0.0 || b <= 0.0) continue;  // outside the log-copula domain
        double rel = std::fabs(a - b) / std::max(a, b);
        double v[2] = {std::log(pt[0]), std::log(pt[1])};
        double hr = homogeneity_residual(s, v, k);
        bool rel_zero = rel <= 1e-12;
        bool hr_zero = hr <= 1e-12;
        bool rel_big = rel > 1e-6;
        bool hr_big = hr > 1e-6;
        CHECK_FALSE((rel_zero && hr_big));
        CHECK_FALSE((hr_zero && rel_big));
      }
    }
    CHECK(max_abs > 1e-3);
  }
}
