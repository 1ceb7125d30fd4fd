#pragma once

#include <array>
#include <functional>
#include <span>

#include "json.hpp"

namespace selfchain {

/// Bivariate extreme-value dependence function A on [0,1]. Valid A satisfy
/// A(0) = A(1) = 1, max(t, 1-t) <= A(t) <= 1 and convexity.
class PickandsFn {
 public:
  enum class Kind { gumbel, marshall_olkin, constant_one };

  static PickandsFn gumbel(double theta);
  static PickandsFn marshall_olkin(double alpha1, double alpha2);
  static PickandsFn constant_one();

  /// A(t); throws std::domain_error for t outside [0,1].
  double operator()(double t) const;

  Kind kind() const noexcept { return kind_; }
  double theta() const noexcept { return theta_; }
  double alpha1() const noexcept { return alpha1_; }
  double alpha2() const noexcept { return alpha2_; }

 private:
  explicit PickandsFn(Kind k) : kind_(k) {}
  Kind kind_;
  double theta_ = 0.0;
  double alpha1_ = 0.0;
  double alpha2_ = 0.0;
};

double pickands_eval(const PickandsFn& a, double t);

/// C(u,v) = exp( ln(uv) * A( ln v / ln(uv) ) ) for interior u, v; the
/// second-coordinate weight convention is used throughout.
double copula_from_pickands(const PickandsFn& a, double u, double v);

/// Endpoint, envelope and discrete-convexity checks on a uniform grid.
struct PickandsValidity {
  double max_endpoint_violation = 0.0;
  double max_bound_violation = 0.0;
  double min_second_difference = 0.0;
  int grid_size = 0;
  bool valid(double tol) const {
    return max_endpoint_violation <= tol && max_bound_violation <= tol &&
           min_second_difference >= -tol;
  }
  nlohmann::json to_json() const;
};

PickandsValidity check_pickands_validity(const PickandsFn& a, int grid_size, double tol);
PickandsValidity check_pickands_validity(const std::function<double(double)>& a, int grid_size,
                                         double tol);

/// Kendall's tau of the Gumbel-Hougaard copula, 1 - 1/theta.
double kendall_tau_gumbel(double theta);

/// Concordance estimator (concordant - discordant) / (n choose 2); ties
/// contribute zero. Knight's O(n log n) merge-sort inversion count.
double kendall_tau_empirical(std::span<const std::array<double, 2>> pairs);

}  // namespace selfchain
