#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "selfchain/copula.hpp"

namespace selfchain {

/// Paired one-shot vs multi-step joint survival over N periods of length T,
/// analytic and Monte Carlo. gap = one_shot_analytic - multi_step_analytic;
/// it vanishes exactly when the copula is self-chaining.
struct ChainReport {
  double one_shot_analytic = 0.0;
  double multi_step_analytic = 0.0;
  double gap = 0.0;
  McEstimate one_shot_mc;
  McEstimate multi_step_mc;
  int n_periods = 0;
  double period_length = 0.0;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Maximum identity residual over a grid, with the witness recorded.
struct ResidualReport {
  double max_residual = 0.0;
  std::vector<double> argmax_point;
  double argmax_k = 0.0;
  int grid_size = 0;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// |C(u^k) - C(u)^k| at an interior point, k > 0.
double self_chain_residual(const CopulaSpec& spec, std::span<const double> u, double k);

/// Sweep of self_chain_residual over points x exponents.
ResidualReport max_residual_grid(const CopulaSpec& spec,
                                 const std::vector<std::vector<double>>& points,
                                 std::span<const double> ks);

/// Tensor grid {0.05, 0.10, ..., 0.95}^dim.
std::vector<std::vector<double>> default_residual_grid(int dim);
/// Exponents {0.5, 2, 3, 10, 100}.
const std::vector<double>& default_residual_exponents();

/// log C(exp(v)) for componentwise nonpositive v, evaluated in log space
/// family by family so deep-tail arguments do not underflow. Throws
/// std::domain_error where the copula value is zero (outside the domain).
double log_copula(const CopulaSpec& spec, std::span<const double> v);

/// |L(k v) - k L(v)| with L the log-copula above.
double homogeneity_residual(const CopulaSpec& spec, std::span<const double> v, double k);

/// Central-difference residual of
///   C_u u ln u + C_v v ln v = C ln C
/// at an interior bivariate point; step h must keep u,v +- h interior.
double pde_residual(const CopulaSpec& spec, double u, double v, double h);

/// Joint survival of all components past N*T, evaluated at the final horizon.
double one_shot_survival(const ArrivalTimeModel& model, int n_periods, double period_length);

/// N-th power of the per-period joint survival.
double multi_step_survival(const ArrivalTimeModel& model, int n_periods, double period_length);

/// MC estimate of one-shot joint survival: one copula draw per scenario.
/// Scenario i consumes RngStream(rng.seed(), rng.stream_id() + 1 + i), so the
/// result is independent of worker count.
McEstimate mc_one_shot(const ArrivalTimeModel& model, int n_periods, double period_length,
                       std::uint64_t scenarios, const RngStream& rng, int workers = 1);

/// MC estimate of iterated survival: N fresh copula draws per scenario, the
/// scenario survives only if every period clears jointly (early exit on the
/// first failed period).
McEstimate mc_multi_step(const ArrivalTimeModel& model, int n_periods, double period_length,
                         std::uint64_t scenarios, const RngStream& rng, int workers = 1);

/// The k-block maximum transform u -> C(u^k)^(1/k); its fixed points are
/// exactly the self-chaining copulas.
std::function<double(std::span<const double>)> max_stable_transform(const CopulaSpec& spec,
                                                                    double k);

/// Runs both analytic values and both MC procedures and assembles the report.
ChainReport chain_compare(const ArrivalTimeModel& model, int n_periods, double period_length,
                          std::uint64_t scenarios, std::uint64_t seed, int workers = 1);

}  // namespace selfchain
