#include "selfchain/pickands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace selfchain {

PickandsFn PickandsFn::gumbel(double theta) {
  if (!(theta >= 1.0)) throw std::invalid_argument("PickandsFn::gumbel: theta must be >= 1");
  PickandsFn a(Kind::gumbel);
  a.theta_ = theta;
  return a;
}

PickandsFn PickandsFn::marshall_olkin(double alpha1, double alpha2) {
  if (!(alpha1 >= 0.0 && alpha1 <= 1.0) || !(alpha2 >= 0.0 && alpha2 <= 1.0))
    throw std::invalid_argument("PickandsFn::marshall_olkin: alphas must lie in [0,1]");
  PickandsFn a(Kind::marshall_olkin);
  a.alpha1_ = alpha1;
  a.alpha2_ = alpha2;
  return a;
}

PickandsFn PickandsFn::constant_one() { return PickandsFn(Kind::constant_one); }

double PickandsFn::operator()(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("PickandsFn: t outside [0,1]");
  switch (kind_) {
    case Kind::constant_one:
      return 1.0;
    case Kind::gumbel: {
      if (theta_ == 1.0) return 1.0;
      if (t == 0.0 || t == 1.0) return 1.0;
      double m = std::max(t, 1.0 - t);
      double s = std::pow(t / m, theta_) + std::pow((1.0 - t) / m, theta_);
      return m * std::pow(s, 1.0 / theta_);
    }
    case Kind::marshall_olkin:
      return 1.0 - std::min(alpha1_ * (1.0 - t), alpha2_ * t);
  }
  throw std::logic_error("PickandsFn: unknown kind");
}

double pickands_eval(const PickandsFn& a, double t) { return a(t); }

double copula_from_pickands(const PickandsFn& a, double u, double v) {
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    throw std::domain_error("copula_from_pickands: u, v must lie strictly inside (0,1)");
  double lu = std::log(u);
  double lv = std::log(v);
  double s = lu + lv;
  return std::exp(s * a(lv / s));
}

PickandsValidity check_pickands_validity(const std::function<double(double)>& a, int grid_size,
                                         double tol) {
  if (grid_size < 3) throw std::invalid_argument("check_pickands_validity: grid_size must be >= 3");
  if (!(tol > 0.0)) throw std::invalid_argument("check_pickands_validity: tol must be > 0");
  PickandsValidity rep;
  rep.grid_size = grid_size;
  rep.max_endpoint_violation =
      std::max(std::fabs(a(0.0) - 1.0), std::fabs(a(1.0) - 1.0));

  std::vector<double> vals(grid_size);
  double h = 1.0 / (grid_size - 1);
  for (int i = 0; i < grid_size; ++i) {
    double t = i * h;
    double at = a(t);
    vals[i] = at;
    double lower = std::max(t, 1.0 - t);
    double viol = std::max(lower - at, at - 1.0);
    rep.max_bound_violation = std::max(rep.max_bound_violation, viol);
  }
  rep.min_second_difference = std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < grid_size; ++i) {
    double d2 = vals[i - 1] - 2.0 * vals[i] + vals[i + 1];
    rep.min_second_difference = std::min(rep.min_second_difference, d2);
  }
  return rep;
}

PickandsValidity check_pickands_validity(const PickandsFn& a, int grid_size, double tol) {
  return check_pickands_validity([&a](double t) { return a(t); }, grid_size, tol);
}

nlohmann::json PickandsValidity::to_json() const {
  return nlohmann::json{{"max_endpoint_violation", max_endpoint_violation},
                        {"max_bound_violation", max_bound_violation},
                        {"min_second_difference", min_second_difference},
                        {"grid_size", grid_size}};
}

double kendall_tau_gumbel(double theta) {
  if (!(theta >= 1.0)) throw std::domain_error("kendall_tau_gumbel: theta must be >= 1");
  return 1.0 - 1.0 / theta;
}

namespace {

// Strict inversions of y by merge sort; pairs tied in y are not counted.
std::uint64_t count_inversions(std::vector<double>& y, std::vector<double>& buf, std::size_t lo,
                               std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(y, buf, lo, mid) + count_inversions(y, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (y[j] < y[i]) {
      inv += mid - i;  // y[j] is strictly below every remaining left element
      buf[k++] = y[j++];
    } else {
      buf[k++] = y[i++];
    }
  }
  while (i < mid) buf[k++] = y[i++];
  while (j < hi) buf[k++] = y[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, y.begin() + lo);
  return inv;
}

std::uint64_t tied_pair_count(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::uint64_t ties = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    std::uint64_t run = j - i;
    ties += run * (run - 1) / 2;
    i = j;
  }
  return ties;
}

}  // namespace

double kendall_tau_empirical(std::span<const std::array<double, 2>> pairs) {
  const std::size_t n = pairs.size();
  if (n < 2) throw std::invalid_argument("kendall_tau_empirical: need at least 2 pairs");

  std::vector<std::array<double, 2>> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a[0] != b[0]) return a[0] < b[0];
    return a[1] < b[1];
  });

  // Pairs tied in x, in y, and in both.
  std::uint64_t ties_x = 0, ties_xy = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && sorted[j][0] == sorted[i][0]) ++j;
    std::uint64_t run = j - i;
    ties_x += run * (run - 1) / 2;
    std::size_t a = i;
    while (a < j) {
      std::size_t b = a;
      while (b < j && sorted[b][1] == sorted[a][1]) ++b;
      std::uint64_t r2 = b - a;
      ties_xy += r2 * (r2 - 1) / 2;
      a = b;
    }
    i = j;
  }
  std::vector<double> y(n), ally(n), buf(n);
  for (std::size_t t = 0; t < n; ++t) {
    y[t] = sorted[t][1];
    ally[t] = sorted[t][1];
  }
  std::uint64_t ties_y = tied_pair_count(std::move(ally));

  // Within an x-tie block y is ascending, so every counted inversion crosses
  // distinct x values: discordant = strict y-inversions.
  std::uint64_t discordant = count_inversions(y, buf, 0, n);
  std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uint64_t untied = total - ties_x - ties_y + ties_xy;
  std::uint64_t concordant = untied - discordant;
  return (static_cast<double>(concordant) - static_cast<double>(discordant)) /
         static_cast<double>(total);
}

}  // namespace selfchain
