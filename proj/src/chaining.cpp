#include "selfchain/chaining.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "selfchain/csv.hpp"
#include "selfchain/samplers.hpp"

namespace selfchain {

namespace {

nlohmann::json mc_to_json(const McEstimate& e) {
  return nlohmann::json{{"mean", e.mean},
                        {"stderr", e.std_error},
                        {"n_scenarios", e.n_scenarios},
                        {"seed", e.seed}};
}

void require_interior(std::span<const double> u) {
  for (double ui : u)
    if (!(ui > 0.0 && ui < 1.0))
      throw std::domain_error("expected a point strictly inside (0,1)^n");
}

// Integer-count MC over [0, scenarios) with per-scenario streams; the block
// split across workers never changes the total.
std::uint64_t count_scenarios(std::uint64_t scenarios, int workers,
                              const std::function<bool(RngStream&)>& run_one,
                              std::uint64_t seed, std::uint64_t stream_base) {
  if (scenarios == 0) throw std::invalid_argument("monte carlo: scenarios must be >= 1");
  if (workers < 1) throw std::invalid_argument("monte carlo: workers must be >= 1");
  auto count_range = [&](std::uint64_t begin, std::uint64_t end) {
    std::uint64_t hits = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      RngStream rng(seed, stream_base + 1 + i);
      hits += run_one(rng) ? 1 : 0;
    }
    return hits;
  };
  if (workers == 1 || scenarios < 1024) return count_range(0, scenarios);

  std::uint64_t n_blocks = static_cast<std::uint64_t>(workers);
  std::vector<std::uint64_t> partial(n_blocks, 0);
  std::vector<std::thread> pool;
  pool.reserve(n_blocks);
  std::uint64_t chunk = scenarios / n_blocks;
  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    std::uint64_t begin = b * chunk;
    std::uint64_t end = (b + 1 == n_blocks) ? scenarios : begin + chunk;
    pool.emplace_back([&, b, begin, end] { partial[b] = count_range(begin, end); });
  }
  for (auto& t : pool) t.join();
  std::uint64_t total = 0;
  for (auto h : partial) total += h;
  return total;
}

}  // namespace

double self_chain_residual(const CopulaSpec& spec, std::span<const double> u, double k) {
  if (!(k > 0.0)) throw std::domain_error("self_chain_residual: k must be > 0");
  require_interior(u);
  std::vector<double> uk(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) uk[i] = std::pow(u[i], k);
  double lhs = copula_cdf(spec, uk);
  double rhs = std::pow(copula_cdf(spec, u), k);
  return std::fabs(lhs - rhs);
}

ResidualReport max_residual_grid(const CopulaSpec& spec,
                                 const std::vector<std::vector<double>>& points,
                                 std::span<const double> ks) {
  if (points.empty() || ks.empty())
    throw std::invalid_argument("max_residual_grid: empty grid or exponent set");
  ResidualReport rep;
  rep.max_residual = -1.0;
  for (const auto& pt : points) {
    for (double k : ks) {
      double r = self_chain_residual(spec, pt, k);
      if (r > rep.max_residual) {
        rep.max_residual = r;
        rep.argmax_point = pt;
        rep.argmax_k = k;
      }
    }
  }
  rep.grid_size = static_cast<int>(points.size() * ks.size());
  return rep;
}

std::vector<std::vector<double>> default_residual_grid(int dim) {
  if (dim < 1) throw std::invalid_argument("default_residual_grid: dim must be >= 1");
  std::vector<double> axis;
  for (int i = 1; i <= 19; ++i) axis.push_back(0.05 * i);
  std::vector<std::vector<double>> pts;
  std::vector<std::size_t> idx(dim, 0);
  while (true) {
    std::vector<double> pt(dim);
    for (int d = 0; d < dim; ++d) pt[d] = axis[idx[d]];
    pts.push_back(std::move(pt));
    int d = 0;
    while (d < dim && ++idx[d] == axis.size()) idx[d++] = 0;
    if (d == dim) break;
  }
  return pts;
}

const std::vector<double>& default_residual_exponents() {
  static const std::vector<double> ks = {0.5, 2.0, 3.0, 10.0, 100.0};
  return ks;
}

double log_copula(const CopulaSpec& spec, std::span<const double> v) {
  if (static_cast<int>(v.size()) != spec.dim())
    throw std::invalid_argument("log_copula: dimension mismatch");
  for (double vi : v) {
    if (std::isnan(vi) || vi > 0.0)
      throw std::domain_error("log_copula: arguments must be nonpositive");
    if (std::isinf(vi)) throw std::domain_error("log_copula: copula value is zero at exp(v)");
  }
  switch (spec.family()) {
    case Family::independence: {
      double s = 0.0;
      for (double vi : v) s += vi;
      return s;
    }
    case Family::comonotone: {
      double m = 0.0;
      for (double vi : v) m = std::min(m, vi);
      return m;
    }
    case Family::gumbel_hougaard: {
      double theta = spec.theta();
      if (theta == 1.0) {
        double s = 0.0;
        for (double vi : v) s += vi;
        return s;
      }
      double m = 0.0;
      for (double vi : v) m = std::max(m, -vi);
      if (m == 0.0) return 0.0;
      double s = 0.0;
      for (double vi : v) s += std::pow(-vi / m, theta);
      return -m * std::pow(s, 1.0 / theta);
    }
    case Family::marshall_olkin: {
      double a = (1.0 - spec.alpha1()) * v[0] + v[1];
      double b = v[0] + (1.0 - spec.alpha2()) * v[1];
      return std::min(a, b);
    }
    case Family::gaussian: {
      std::vector<double> u(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) u[i] = std::exp(v[i]);
      double c = copula_cdf(spec, u);
      if (!(c > 0.0)) throw std::domain_error("log_copula: copula value is zero at exp(v)");
      return std::log(c);
    }
  }
  throw std::logic_error("log_copula: unknown family");
}

double homogeneity_residual(const CopulaSpec& spec, std::span<const double> v, double k) {
  if (!(k > 0.0)) throw std::domain_error("homogeneity_residual: k must be > 0");
  std::vector<double> kv(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) kv[i] = k * v[i];
  return std::fabs(log_copula(spec, kv) - k * log_copula(spec, v));
}

double pde_residual(const CopulaSpec& spec, double u, double v, double h) {
  if (spec.dim() != 2) throw std::invalid_argument("pde_residual: bivariate specs only");
  if (!(h > 0.0)) throw std::domain_error("pde_residual: h must be > 0");
  if (!(u - h > 0.0 && u + h < 1.0 && v - h > 0.0 && v + h < 1.0))
    throw std::domain_error("pde_residual: step too large for interior point");
  auto eval = [&](double a, double b) {
    const double pt[2] = {a, b};
    return copula_cdf(spec, pt);
  };
  double c = eval(u, v);
  if (!(c > 0.0)) throw std::domain_error("pde_residual: copula value is zero");
  double cu = (eval(u + h, v) - eval(u - h, v)) / (2.0 * h);
  double cv = (eval(u, v + h) - eval(u, v - h)) / (2.0 * h);
  return cu * u * std::log(u) + cv * v * std::log(v) - c * std::log(c);
}

double one_shot_survival(const ArrivalTimeModel& model, int n_periods, double period_length) {
  if (n_periods < 1) throw std::invalid_argument("one_shot_survival: N must be >= 1");
  if (!(period_length > 0.0)) throw std::invalid_argument("one_shot_survival: T must be > 0");
  std::vector<double> t(model.lambdas.size(), n_periods * period_length);
  return survival_probability(model, t);
}

double multi_step_survival(const ArrivalTimeModel& model, int n_periods, double period_length) {
  if (n_periods < 1) throw std::invalid_argument("multi_step_survival: N must be >= 1");
  if (!(period_length > 0.0)) throw std::invalid_argument("multi_step_survival: T must be > 0");
  std::vector<double> t(model.lambdas.size(), period_length);
  return std::pow(survival_probability(model, t), n_periods);
}

McEstimate mc_one_shot(const ArrivalTimeModel& model, int n_periods, double period_length,
                       std::uint64_t scenarios, const RngStream& rng, int workers) {
  if (n_periods < 1 || !(period_length > 0.0))
    throw std::invalid_argument("mc_one_shot: invalid horizon");
  const int dim = model.copula.dim();
  std::vector<double> thr(dim);
  for (int i = 0; i < dim; ++i)
    thr[i] = std::exp(-model.lambdas[i] * n_periods * period_length);
  CopulaSampler sampler(model.copula);
  auto run_one = [&](RngStream& r) {
    constexpr int kStack = 16;
    double ubuf[kStack];
    std::vector<double> uheap;
    std::span<double> u;
    if (dim <= kStack) u = std::span<double>(ubuf, static_cast<std::size_t>(dim));
    else { uheap.resize(dim); u = uheap; }
    sampler.draw(u, r);
    for (int i = 0; i < dim; ++i)
      if (!(u[i] < thr[i])) return false;  // tau_i > NT  <=>  u_i < exp(-lambda_i N T)
    return true;
  };
  std::uint64_t hits =
      count_scenarios(scenarios, workers, run_one, rng.seed(), rng.stream_id());
  return mc_estimate_from_count(hits, scenarios, rng.seed());
}

McEstimate mc_multi_step(const ArrivalTimeModel& model, int n_periods, double period_length,
                         std::uint64_t scenarios, const RngStream& rng, int workers) {
  if (n_periods < 1 || !(period_length > 0.0))
    throw std::invalid_argument("mc_multi_step: invalid horizon");
  const int dim = model.copula.dim();
  std::vector<double> thr(dim);
  for (int i = 0; i < dim; ++i) thr[i] = std::exp(-model.lambdas[i] * period_length);
  CopulaSampler sampler(model.copula);
  auto run_one = [&](RngStream& r) {
    constexpr int kStack = 16;
    double ubuf[kStack];
    std::vector<double> uheap;
    std::span<double> u;
    if (dim <= kStack) u = std::span<double>(ubuf, static_cast<std::size_t>(dim));
    else { uheap.resize(dim); u = uheap; }
    for (int p = 0; p < n_periods; ++p) {
      sampler.draw(u, r);
      for (int i = 0; i < dim; ++i)
        if (!(u[i] < thr[i])) return false;
    }
    return true;
  };
  std::uint64_t hits =
      count_scenarios(scenarios, workers, run_one, rng.seed(), rng.stream_id());
  return mc_estimate_from_count(hits, scenarios, rng.seed());
}

std::function<double(std::span<const double>)> max_stable_transform(const CopulaSpec& spec,
                                                                    double k) {
  if (!(k > 0.0)) throw std::domain_error("max_stable_transform: k must be > 0");
  return [spec, k](std::span<const double> u) {
    std::vector<double> uk(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!(u[i] >= 0.0 && u[i] <= 1.0))
        throw std::domain_error("max_stable_transform: u outside [0,1]");
      uk[i] = std::pow(u[i], k);
    }
    return std::pow(copula_cdf(spec, uk), 1.0 / k);
  };
}

ChainReport chain_compare(const ArrivalTimeModel& model, int n_periods, double period_length,
                          std::uint64_t scenarios, std::uint64_t seed, int workers) {
  ChainReport rep;
  rep.n_periods = n_periods;
  rep.period_length = period_length;
  rep.one_shot_analytic = one_shot_survival(model, n_periods, period_length);
  rep.multi_step_analytic = multi_step_survival(model, n_periods, period_length);
  rep.gap = rep.one_shot_analytic - rep.multi_step_analytic;
  // Disjoint stream ranges for the two procedures.
  rep.one_shot_mc =
      mc_one_shot(model, n_periods, period_length, scenarios, RngStream(seed, 0), workers);
  rep.multi_step_mc = mc_multi_step(model, n_periods, period_length, scenarios,
                                    RngStream(seed, scenarios + 1), workers);
  return rep;
}

nlohmann::json ChainReport::to_json() const {
  return nlohmann::json{{"one_shot_analytic", one_shot_analytic},
                        {"multi_step_analytic", multi_step_analytic},
                        {"gap", gap},
                        {"one_shot_mc", mc_to_json(one_shot_mc)},
                        {"multi_step_mc", mc_to_json(multi_step_mc)},
                        {"N", n_periods},
                        {"T", period_length}};
}

std::string ChainReport::csv_header() {
  return "one_shot_analytic,multi_step_analytic,gap,one_shot_mc_mean,one_shot_mc_stderr,"
         "multi_step_mc_mean,multi_step_mc_stderr,n_scenarios,seed,N,T";
}

std::string ChainReport::csv_row() const {
  std::ostringstream os;
  os << format_double(one_shot_analytic) << ',' << format_double(multi_step_analytic) << ','
     << format_double(gap) << ',' << format_double(one_shot_mc.mean) << ','
     << format_double(one_shot_mc.std_error) << ',' << format_double(multi_step_mc.mean) << ','
     << format_double(multi_step_mc.std_error) << ',' << one_shot_mc.n_scenarios << ','
     << one_shot_mc.seed << ',' << n_periods << ',' << format_double(period_length);
  return os.str();
}

nlohmann::json ResidualReport::to_json() const {
  return nlohmann::json{{"max_residual", max_residual},
                        {"argmax_point", argmax_point},
                        {"argmax_k", argmax_k},
                        {"grid_size", grid_size}};
}

std::string ResidualReport::csv_header() {
  return "max_residual,argmax_point,argmax_k,grid_size";
}

std::string ResidualReport::csv_row() const {
  std::ostringstream os;
  os << format_double(max_residual) << ",\"";
  for (std::size_t i = 0; i < argmax_point.size(); ++i) {
    if (i) os << ' ';
    os << format_double(argmax_point[i]);
  }
  os << "\"," << format_double(argmax_k) << ',' << grid_size;
  return os.str();
}

}  // namespace selfchain
