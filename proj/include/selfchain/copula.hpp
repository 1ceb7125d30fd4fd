#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "selfchain/numerics.hpp"

namespace selfchain {

enum class Family { gumbel_hougaard, marshall_olkin, gaussian, independence, comonotone };

std::string family_name(Family f);
Family family_from_name(std::string_view name);

/// Validated descriptor of a copula family. Construction checks the parameter
/// ranges: theta in [1, 1e4], alphas in [0,1], Gaussian correlation matrix
/// symmetric PSD with unit diagonal and |rho_ij| < 1 off the diagonal,
/// Marshall-Olkin restricted to two dimensions.
class CopulaSpec {
 public:
  static CopulaSpec gumbel_hougaard(double theta, int dim = 2);
  static CopulaSpec marshall_olkin(double alpha1, double alpha2);
  static CopulaSpec gaussian(double rho);
  static CopulaSpec gaussian(std::vector<double> corr_row_major, int dim);
  static CopulaSpec independence(int dim = 2);
  static CopulaSpec comonotone(int dim = 2);

  Family family() const noexcept { return family_; }
  int dim() const noexcept { return dim_; }
  double theta() const;
  double alpha1() const;
  double alpha2() const;
  /// Row-major correlation matrix (Gaussian only).
  const std::vector<double>& corr() const;
  double corr(int i, int j) const;
  /// Cached lower-triangular factor of corr (Gaussian only), row-major.
  const std::vector<double>& cholesky() const;

  bool operator==(const CopulaSpec& other) const noexcept;

  nlohmann::json to_json() const;
  static CopulaSpec from_json(const nlohmann::json& j);

 private:
  CopulaSpec(Family f, int dim) : family_(f), dim_(dim) {}

  Family family_;
  int dim_;
  double theta_ = 0.0;
  double alpha1_ = 0.0;
  double alpha2_ = 0.0;
  std::vector<double> corr_;
  std::vector<double> chol_;
};

/// Exponential marginal intensities joined by a survival-times copula:
/// P(tau_1 > t_1, ..., tau_n > t_n) = C(exp(-lambda_1 t_1), ..., exp(-lambda_n t_n)).
struct ArrivalTimeModel {
  ArrivalTimeModel(std::vector<double> lambdas_in, CopulaSpec copula_in);
  std::vector<double> lambdas;
  CopulaSpec copula;
};

/// Strict Archimedean generator pair: phi maps (0,1] onto [0,inf) with
/// phi(1)=0, strictly decreasing and convex; phi_inv is its exact inverse.
struct Generator {
  std::function<double(double)> phi;
  std::function<double(double)> phi_inv;
};

/// Generator of the Gumbel-Hougaard family: phi(u) = (-ln u)^theta.
Generator gumbel_generator(double theta);

/// Copula CDF at u in [0,1]^dim. Gaussian evaluation is bivariate only
/// (higher dimensions are sampled, not integrated).
double copula_cdf(const CopulaSpec& spec, std::span<const double> u);

/// phi_inv(sum_i phi(u_i)) for a strict generator; u componentwise in (0,1].
double archimedean_cdf(const Generator& gen, std::span<const double> u);

/// A copula CDF as a plain callable, for code generic over the evaluator.
using CopulaFn = std::function<double(std::span<const double>)>;
CopulaFn copula_fn(const CopulaSpec& spec);

/// Inclusion-exclusion mass of the rectangle [lo_1,hi_1]x...x[lo_n,hi_n].
double c_volume(const CopulaFn& cdf, std::span<const double> lo, std::span<const double> hi);
double c_volume(const CopulaSpec& spec, std::span<const double> lo, std::span<const double> hi);

/// Numeric check of the three copula axioms: groundedness and uniform margins
/// on a deterministic grid, rectangle-mass nonnegativity on random rectangles.
struct AxiomReport {
  double max_groundedness_violation = 0.0;
  double max_margin_violation = 0.0;
  double min_rectangle_volume = 0.0;
  int n_rectangles = 0;
  int grid_points_per_axis = 0;
  bool passed(double tol) const {
    return max_groundedness_violation <= tol && max_margin_violation <= tol &&
           min_rectangle_volume >= -tol;
  }
  nlohmann::json to_json() const;
};

AxiomReport check_copula_axioms(const CopulaFn& cdf, int dim, int n_rects, RngStream& rng,
                                double tol);
AxiomReport check_copula_axioms(const CopulaSpec& spec, int n_rects, RngStream& rng, double tol);

/// Joint survival probability of the model at componentwise nonnegative times.
double survival_probability(const ArrivalTimeModel& model, std::span<const double> t);

}  // namespace selfchain
