#include "selfchain/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace selfchain {

namespace {

constexpr double kThetaMax = 1e4;

// Lower Cholesky factor with a zero-pivot tolerance so exactly singular PSD
// matrices (e.g. rank-deficient correlation blocks) still factor. Throws on
// indefinite input.
std::vector<double> cholesky_psd(const std::vector<double>& a, int n) {
  std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
  const double tol = 1e-10 * n;
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (d < -tol) throw std::invalid_argument("correlation matrix is not positive semidefinite");
    d = d > 0.0 ? std::sqrt(d) : 0.0;
    l[j * n + j] = d;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = d > 0.0 ? s / d : 0.0;
    }
  }
  return l;
}

void require_dim(const CopulaSpec& spec, std::size_t got) {
  if (static_cast<int>(got) != spec.dim())
    throw std::invalid_argument("copula: dimension mismatch between spec and argument");
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::gumbel_hougaard: return "gumbel_hougaard";
    case Family::marshall_olkin: return "marshall_olkin";
    case Family::gaussian: return "gaussian";
    case Family::independence: return "independence";
    case Family::comonotone: return "comonotone";
  }
  throw std::logic_error("family_name: unknown family");
}

Family family_from_name(std::string_view name) {
  if (name == "gumbel_hougaard") return Family::gumbel_hougaard;
  if (name == "marshall_olkin") return Family::marshall_olkin;
  if (name == "gaussian") return Family::gaussian;
  if (name == "independence") return Family::independence;
  if (name == "comonotone") return Family::comonotone;
  throw std::invalid_argument("unknown copula family: " + std::string(name));
}

CopulaSpec CopulaSpec::gumbel_hougaard(double theta, int dim) {
  if (dim < 2) throw std::invalid_argument("gumbel_hougaard: dim must be >= 2");
  if (!(theta >= 1.0) || !(theta <= kThetaMax))
    throw std::invalid_argument("gumbel_hougaard: theta must lie in [1, 1e4]");
  CopulaSpec s(Family::gumbel_hougaard, dim);
  s.theta_ = theta;
  return s;
}

CopulaSpec CopulaSpec::marshall_olkin(double alpha1, double alpha2) {
  if (!(alpha1 >= 0.0 && alpha1 <= 1.0) || !(alpha2 >= 0.0 && alpha2 <= 1.0))
    throw std::invalid_argument("marshall_olkin: alphas must lie in [0,1]");
  CopulaSpec s(Family::marshall_olkin, 2);
  s.alpha1_ = alpha1;
  s.alpha2_ = alpha2;
  return s;
}

CopulaSpec CopulaSpec::gaussian(double rho) {
  return gaussian({1.0, rho, rho, 1.0}, 2);
}

CopulaSpec CopulaSpec::gaussian(std::vector<double> corr_row_major, int dim) {
  if (dim < 2) throw std::invalid_argument("gaussian: dim must be >= 2");
  if (corr_row_major.size() != static_cast<std::size_t>(dim) * dim)
    throw std::invalid_argument("gaussian: correlation matrix size mismatch");
  for (int i = 0; i < dim; ++i) {
    if (corr_row_major[i * dim + i] != 1.0)
      throw std::invalid_argument("gaussian: correlation matrix must have unit diagonal");
    for (int j = 0; j < i; ++j) {
      double rij = corr_row_major[i * dim + j];
      if (rij != corr_row_major[j * dim + i])
        throw std::invalid_argument("gaussian: correlation matrix must be symmetric");
      if (!(std::fabs(rij) < 1.0))
        throw std::invalid_argument(
            "gaussian: off-diagonal |rho| must be < 1 (use comonotone for the limit)");
    }
  }
  CopulaSpec s(Family::gaussian, dim);
  s.chol_ = cholesky_psd(corr_row_major, dim);
  s.corr_ = std::move(corr_row_major);
  return s;
}

CopulaSpec CopulaSpec::independence(int dim) {
  if (dim < 2) throw std::invalid_argument("independence: dim must be >= 2");
  return CopulaSpec(Family::independence, dim);
}

CopulaSpec CopulaSpec::comonotone(int dim) {
  if (dim < 2) throw std::invalid_argument("comonotone: dim must be >= 2");
  return CopulaSpec(Family::comonotone, dim);
}

double CopulaSpec::theta() const {
  if (family_ != Family::gumbel_hougaard)
    throw std::logic_error("CopulaSpec::theta: not a Gumbel-Hougaard spec");
  return theta_;
}

double CopulaSpec::alpha1() const {
  if (family_ != Family::marshall_olkin)
    throw std::logic_error("CopulaSpec::alpha1: not a Marshall-Olkin spec");
  return alpha1_;
}

double CopulaSpec::alpha2() const {
  if (family_ != Family::marshall_olkin)
    throw std::logic_error("CopulaSpec::alpha2: not a Marshall-Olkin spec");
  return alpha2_;
}

const std::vector<double>& CopulaSpec::corr() const {
  if (family_ != Family::gaussian) throw std::logic_error("CopulaSpec::corr: not a Gaussian spec");
  return corr_;
}

double CopulaSpec::corr(int i, int j) const {
  const auto& m = corr();
  if (i < 0 || j < 0 || i >= dim_ || j >= dim_)
    throw std::out_of_range("CopulaSpec::corr: index out of range");
  return m[static_cast<std::size_t>(i) * dim_ + j];
}

const std::vector<double>& CopulaSpec::cholesky() const {
  if (family_ != Family::gaussian)
    throw std::logic_error("CopulaSpec::cholesky: not a Gaussian spec");
  return chol_;
}

bool CopulaSpec::operator==(const CopulaSpec& other) const noexcept {
  return family_ == other.family_ && dim_ == other.dim_ && theta_ == other.theta_ &&
         alpha1_ == other.alpha1_ && alpha2_ == other.alpha2_ && corr_ == other.corr_;
}

nlohmann::json CopulaSpec::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(family_);
  j["dim"] = dim_;
  switch (family_) {
    case Family::gumbel_hougaard:
      j["theta"] = theta_;
      break;
    case Family::marshall_olkin:
      j["alpha1"] = alpha1_;
      j["alpha2"] = alpha2_;
      break;
    case Family::gaussian: {
      nlohmann::json rows = nlohmann::json::array();
      for (int i = 0; i < dim_; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < dim_; ++k) row.push_back(corr_[i * dim_ + k]);
        rows.push_back(std::move(row));
      }
      j["corr"] = std::move(rows);
      break;
    }
    default:
      break;
  }
  return j;
}

CopulaSpec CopulaSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family"))
    throw std::invalid_argument("CopulaSpec: expected object with a \"family\" field");
  Family f = family_from_name(j.at("family").get<std::string>());
  int dim = j.value("dim", 2);
  switch (f) {
    case Family::gumbel_hougaard:
      if (!j.contains("theta"))
        throw std::invalid_argument("CopulaSpec: gumbel_hougaard requires \"theta\"");
      return gumbel_hougaard(j.at("theta").get<double>(), dim);
    case Family::marshall_olkin:
      if (!j.contains("alpha1") || !j.contains("alpha2"))
        throw std::invalid_argument("CopulaSpec: marshall_olkin requires \"alpha1\" and \"alpha2\"");
      if (j.value("dim", 2) != 2)
        throw std::invalid_argument("CopulaSpec: marshall_olkin supports dim = 2 only");
      return marshall_olkin(j.at("alpha1").get<double>(), j.at("alpha2").get<double>());
    case Family::gaussian: {
      if (!j.contains("corr"))
        throw std::invalid_argument("CopulaSpec: gaussian requires \"corr\"");
      const auto& rows = j.at("corr");
      if (!rows.is_array() || rows.empty())
        throw std::invalid_argument("CopulaSpec: \"corr\" must be a non-empty matrix");
      int n = static_cast<int>(rows.size());
      if (j.contains("dim") && j.at("dim").get<int>() != n)
        throw std::invalid_argument("CopulaSpec: \"dim\" disagrees with \"corr\" size");
      std::vector<double> m;
      m.reserve(static_cast<std::size_t>(n) * n);
      for (const auto& row : rows) {
        if (!row.is_array() || static_cast<int>(row.size()) != n)
          throw std::invalid_argument("CopulaSpec: \"corr\" must be square");
        for (const auto& v : row) m.push_back(v.get<double>());
      }
      return gaussian(std::move(m), n);
    }
    case Family::independence:
      return independence(dim);
    case Family::comonotone:
      return comonotone(dim);
  }
  throw std::logic_error("CopulaSpec::from_json: unreachable");
}

ArrivalTimeModel::ArrivalTimeModel(std::vector<double> lambdas_in, CopulaSpec copula_in)
    : lambdas(std::move(lambdas_in)), copula(std::move(copula_in)) {
  if (static_cast<int>(lambdas.size()) != copula.dim())
    throw std::invalid_argument("ArrivalTimeModel: lambdas size must equal copula dim");
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l))
      throw std::invalid_argument("ArrivalTimeModel: intensities must be positive and finite");
}

Generator gumbel_generator(double theta) {
  if (!(theta >= 1.0)) throw std::invalid_argument("gumbel_generator: theta must be >= 1");
  Generator g;
  g.phi = [theta](double u) {
    if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("generator phi: u outside (0,1]");
    return std::pow(-std::log(u), theta);
  };
  g.phi_inv = [theta](double z) {
    if (!(z >= 0.0)) throw std::domain_error("generator phi_inv: z must be >= 0");
    return std::exp(-std::pow(z, 1.0 / theta));
  };
  return g;
}

namespace {

// (sum_i x_i^theta)^(1/theta) with the max factored out, so large theta and
// wide dynamic range in x do not overflow.
double theta_norm(std::span<const double> x, double theta) {
  double m = 0.0;
  for (double v : x) m = std::max(m, v);
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += std::pow(v / m, theta);
  return m * std::pow(s, 1.0 / theta);
}

}  // namespace

double copula_cdf(const CopulaSpec& spec, std::span<const double> u) {
  require_dim(spec, u.size());
  for (double ui : u) {
    if (!(ui >= 0.0 && ui <= 1.0)) throw std::domain_error("copula_cdf: u outside [0,1]");
    if (ui == 0.0) return 0.0;
  }
  switch (spec.family()) {
    case Family::independence: {
      double p = 1.0;
      for (double ui : u) p *= ui;
      return p;
    }
    case Family::comonotone: {
      double m = 1.0;
      for (double ui : u) m = std::min(m, ui);
      return m;
    }
    case Family::gumbel_hougaard: {
      double theta = spec.theta();
      if (theta == 1.0) {
        double p = 1.0;
        for (double ui : u) p *= ui;
        return p;
      }
      std::vector<double> x(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) x[i] = -std::log(u[i]);
      return std::exp(-theta_norm(x, theta));
    }
    case Family::marshall_olkin: {
      double a = std::pow(u[0], 1.0 - spec.alpha1()) * u[1];
      double b = u[0] * std::pow(u[1], 1.0 - spec.alpha2());
      return std::min(a, b);
    }
    case Family::gaussian: {
      if (spec.dim() != 2)
        throw std::invalid_argument(
            "copula_cdf: Gaussian CDF evaluation is bivariate only; higher dimensions are "
            "sampled, not integrated");
      if (u[0] == 1.0) return u[1];
      if (u[1] == 1.0) return u[0];
      double x = std_normal_inv_cdf(u[0]);
      double y = std_normal_inv_cdf(u[1]);
      return bivariate_normal_cdf(x, y, spec.corr(0, 1));
    }
  }
  throw std::logic_error("copula_cdf: unknown family");
}

double archimedean_cdf(const Generator& gen, std::span<const double> u) {
  if (u.empty()) throw std::invalid_argument("archimedean_cdf: empty argument");
  double s = 0.0;
  for (double ui : u) {
    if (!(ui > 0.0 && ui <= 1.0)) throw std::domain_error("archimedean_cdf: u outside (0,1]");
    s += gen.phi(ui);
  }
  return gen.phi_inv(s);
}

CopulaFn copula_fn(const CopulaSpec& spec) {
  return [spec](std::span<const double> u) { return copula_cdf(spec, u); };
}

double c_volume(const CopulaFn& cdf, std::span<const double> lo, std::span<const double> hi) {
  std::size_t n = lo.size();
  if (n == 0 || n != hi.size()) throw std::invalid_argument("c_volume: bad rectangle");
  if (n > 30) throw std::invalid_argument("c_volume: dimension too large");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("c_volume: rectangle with lo > hi");
    if (!(lo[i] >= 0.0 && hi[i] <= 1.0))
      throw std::invalid_argument("c_volume: rectangle outside [0,1]^n");
  }
  std::vector<double> vertex(n);
  double vol = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    int lo_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bool take_lo = (mask >> i) & 1u;
      vertex[i] = take_lo ? lo[i] : hi[i];
      lo_count += take_lo;
    }
    double sign = (lo_count % 2 == 0) ? 1.0 : -1.0;
    vol += sign * cdf(vertex);
  }
  return vol;
}

double c_volume(const CopulaSpec& spec, std::span<const double> lo, std::span<const double> hi) {
  require_dim(spec, lo.size());
  return c_volume(copula_fn(spec), lo, hi);
}

AxiomReport check_copula_axioms(const CopulaFn& cdf, int dim, int n_rects, RngStream& rng,
                                double tol) {
  if (dim < 2) throw std::invalid_argument("check_copula_axioms: dim must be >= 2");
  if (n_rects < 1) throw std::invalid_argument("check_copula_axioms: n_rects must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("check_copula_axioms: tol must be > 0");

  constexpr int kGrid = 50;
  AxiomReport rep;
  rep.grid_points_per_axis = kGrid;
  rep.n_rectangles = n_rects;
  rep.min_rectangle_volume = std::numeric_limits<double>::infinity();

  std::vector<double> pt(dim);
  for (int coord = 0; coord < dim; ++coord) {
    for (int g = 0; g < kGrid; ++g) {
      double v = static_cast<double>(g + 1) / (kGrid + 1);
      // groundedness: one coordinate pinned to zero
      std::fill(pt.begin(), pt.end(), v);
      pt[coord] = 0.0;
      rep.max_groundedness_violation =
          std::max(rep.max_groundedness_violation, std::fabs(cdf(pt)));
      // uniform margin: all other coordinates at one
      std::fill(pt.begin(), pt.end(), 1.0);
      pt[coord] = v;
      rep.max_margin_violation = std::max(rep.max_margin_violation, std::fabs(cdf(pt) - v));
    }
  }

  std::vector<double> lo(dim), hi(dim);
  for (int r = 0; r < n_rects; ++r) {
    for (int i = 0; i < dim; ++i) {
      double a = rng.next_uniform();
      double b = rng.next_uniform();
      lo[i] = std::min(a, b);
      hi[i] = std::max(a, b);
    }
    rep.min_rectangle_volume = std::min(rep.min_rectangle_volume, c_volume(cdf, lo, hi));
  }
  return rep;
}

AxiomReport check_copula_axioms(const CopulaSpec& spec, int n_rects, RngStream& rng, double tol) {
  return check_copula_axioms(copula_fn(spec), spec.dim(), n_rects, rng, tol);
}

nlohmann::json AxiomReport::to_json() const {
  return nlohmann::json{{"max_groundedness_violation", max_groundedness_violation},
                        {"max_margin_violation", max_margin_violation},
                        {"min_rectangle_volume", min_rectangle_volume},
                        {"n_rectangles", n_rectangles},
                        {"grid_points_per_axis", grid_points_per_axis}};
}

double survival_probability(const ArrivalTimeModel& model, std::span<const double> t) {
  require_dim(model.copula, t.size());
  std::vector<double> u(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0)) throw std::domain_error("survival_probability: negative time");
    u[i] = std::exp(-model.lambdas[i] * t[i]);
  }
  return copula_cdf(model.copula, u);
}

}  // namespace selfchain
