// Command-line front end: sampling, one-shot vs multi-step survival
// comparison, self-chaining verification, Pickands export and Kendall tau.
// Fixed (config, seed) reproduces every output byte for byte, for any
// --workers value.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "selfchain/chaining.hpp"
#include "selfchain/copula.hpp"
#include "selfchain/csv.hpp"
#include "selfchain/pickands.hpp"
#include "selfchain/samplers.hpp"

using nlohmann::json;
using namespace selfchain;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg, std::string field_in = "")
      : std::runtime_error(msg), field(std::move(field_in)) {}
  std::string field;
};

struct RunConfig {
  std::string command;
  json copula;  // canonicalized CopulaSpec JSON
  std::vector<double> lambdas;
  int periods = 1;
  double dt = 1.0;
  std::uint64_t scenarios = 10000;
  std::uint64_t seed = 0;
  std::string out;  // empty -> stdout
  std::string format = "json";
  int workers = 1;
  bool arrival_times = false;
  int rects = 1000;
  double tol = 1e-12;
  int grid_size = 101;
  std::uint64_t samples = 100000;

  // Canonical echo of everything that determines the report's numbers.
  // Execution details (workers, output path) are deliberately left out so
  // outputs stay byte-identical across worker counts and destinations.
  json to_json() const {
    json j;
    j["command"] = command;
    j["copula"] = copula;
    j["lambdas"] = lambdas;
    j["periods"] = periods;
    j["dt"] = dt;
    j["scenarios"] = scenarios;
    j["seed"] = seed;
    j["format"] = format;
    j["arrival_times"] = arrival_times;
    j["rects"] = rects;
    j["tol"] = tol;
    j["grid_size"] = grid_size;
    j["samples"] = samples;
    return j;
  }
};

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';  // RFC 4180: double embedded quotes
    out += c;
  }
  out += '"';
  return out;
}

void emit_error(const std::string& msg, const std::string& field = "") {
  json e;
  e["error"] = msg;
  if (!field.empty()) e["field"] = field;
  std::cerr << e.dump() << '\n';
}

void write_output(const RunConfig& cfg, const std::string& payload) {
  if (cfg.out.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream os(cfg.out, std::ios::binary);
  if (!os) throw ConfigError("cannot open output path: " + cfg.out, "out");
  os << payload;
}

CopulaSpec parse_copula(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg[0] == '@') {
    std::ifstream is(arg.substr(1));
    if (!is) throw ConfigError("cannot read copula file: " + arg.substr(1), "copula");
    std::stringstream ss;
    ss << is.rdbuf();
    text = ss.str();
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("copula is not valid JSON: ") + e.what(), "copula");
  }
  try {
    return CopulaSpec::from_json(j);
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), "copula");
  }
}

std::vector<double> parse_lambdas(const std::string& arg) {
  std::vector<double> out;
  std::stringstream ss(arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("lambdas must be comma-separated numbers", "lambdas");
    }
  }
  if (out.empty()) throw ConfigError("lambdas must not be empty", "lambdas");
  return out;
}

// Deterministic parallel fill: slot i is produced from RngStream(seed, 1+i)
// regardless of which worker runs it.
template <typename Fn>
void parallel_scenarios(std::uint64_t n, int workers, std::uint64_t seed, Fn&& fill_one) {
  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      RngStream rng(seed, 1 + i);
      fill_one(i, rng);
    }
  };
  if (workers <= 1 || n < 1024) {
    run_range(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::uint64_t chunk = n / static_cast<std::uint64_t>(workers);
  for (int w = 0; w < workers; ++w) {
    std::uint64_t begin = static_cast<std::uint64_t>(w) * chunk;
    std::uint64_t end = (w + 1 == workers) ? n : begin + chunk;
    pool.emplace_back(run_range, begin, end);
  }
  for (auto& t : pool) t.join();
}

int cmd_simulate(const RunConfig& cfg, const CopulaSpec& spec) {
  const int dim = spec.dim();
  if (cfg.arrival_times && static_cast<int>(cfg.lambdas.size()) != dim)
    throw ConfigError("lambdas size must equal copula dim", "lambdas");
  if (cfg.scenarios == 0) throw ConfigError("scenarios must be >= 1", "scenarios");

  CopulaSampler sampler(spec);
  std::vector<std::vector<double>> rows(cfg.scenarios);
  parallel_scenarios(cfg.scenarios, cfg.workers, cfg.seed, [&](std::uint64_t i, RngStream& rng) {
    std::vector<double> u = sampler.draw(rng);
    rows[i] = cfg.arrival_times ? to_arrival_times(u, cfg.lambdas) : std::move(u);
  });

  std::ostringstream os;
  write_samples_csv(os, cfg.arrival_times ? "tau" : "u", rows, dim);
  write_output(cfg, os.str());
  return 0;
}

int cmd_chain_compare(const RunConfig& cfg, const CopulaSpec& spec) {
  if (static_cast<int>(cfg.lambdas.size()) != spec.dim())
    throw ConfigError("lambdas size must equal copula dim", "lambdas");
  if (cfg.periods < 1) throw ConfigError("periods must be >= 1", "periods");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be > 0", "dt");
  if (cfg.scenarios == 0) throw ConfigError("scenarios must be >= 1", "scenarios");
  ArrivalTimeModel model(cfg.lambdas, spec);

  ChainReport rep =
      chain_compare(model, cfg.periods, cfg.dt, cfg.scenarios, cfg.seed, cfg.workers);

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "command,copula," << ChainReport::csv_header() << '\n'
       << cfg.command << ',' << csv_quote(cfg.copula.dump()) << ',' << rep.csv_row() << '\n';
    write_output(cfg, os.str());
  } else {
    json j;
    j["command"] = cfg.command;
    j["config"] = cfg.to_json();
    j["result"] = rep.to_json();
    write_output(cfg, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg, const CopulaSpec& spec) {
  if (spec.family() == Family::gaussian && spec.dim() != 2)
    throw ConfigError("verify supports bivariate Gaussian specs only", "copula");
  if (cfg.rects < 1) throw ConfigError("rects must be >= 1", "rects");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be > 0", "tol");

  const int dim = spec.dim();
  RngStream axiom_rng(cfg.seed, 0);
  AxiomReport axioms = check_copula_axioms(spec, cfg.rects, axiom_rng, cfg.tol);
  bool axioms_pass = axioms.passed(cfg.tol);

  std::vector<std::vector<double>> grid;
  if (dim <= 3) {
    grid = default_residual_grid(dim);
  } else {
    RngStream grid_rng(cfg.seed, 1);
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> pt(dim);
      for (auto& v : pt) v = 0.05 + 0.9 * grid_rng.next_uniform();
      grid.push_back(std::move(pt));
    }
  }
  const auto& ks = default_residual_exponents();

  constexpr double kIdentityThreshold = 1e-10;
  ResidualReport identity = max_residual_grid(spec, grid, ks);
  bool identity_pass = identity.max_residual <= kIdentityThreshold;

  double homog_max = 0.0, homog_k = 0.0;
  std::vector<double> homog_arg;
  int homog_skipped = 0;
  std::vector<double> v(dim);
  for (const auto& pt : grid) {
    for (int i = 0; i < dim; ++i) v[i] = std::log(pt[i]);
    for (double k : ks) {
      try {
        double r = homogeneity_residual(spec, v, k);
        if (r > homog_max) {
          homog_max = r;
          homog_arg = pt;
          homog_k = k;
        }
      } catch (const std::domain_error&) {
        ++homog_skipped;  // copula value underflows to zero at this point
      }
    }
  }
  bool homog_pass = homog_max <= kIdentityThreshold;

  constexpr double kPdeStep = 1e-5;
  const double pde_threshold = spec.family() == Family::gaussian ? 1e-4 : 1e-6;
  double pde_max = 0.0;
  std::vector<double> pde_arg;
  bool pde_pass = true;
  bool pde_ran = dim == 2;
  if (pde_ran) {
    for (const auto& pt : grid) {
      double r;
      try {
        r = std::fabs(pde_residual(spec, pt[0], pt[1], kPdeStep));
      } catch (const std::domain_error&) {
        continue;
      }
      const double pt2[2] = {pt[0], pt[1]};
      const double c = copula_cdf(spec, pt2);
      double scale = 1.0 + std::fabs(c * std::log(c));
      if (r > pde_threshold * scale) pde_pass = false;
      if (r > pde_max) {
        pde_max = r;
        pde_arg = pt;
      }
    }
  }

  bool self_chaining = axioms_pass && identity_pass && homog_pass && (!pde_ran || pde_pass);
  std::string verdict = self_chaining ? "SELF-CHAINING" : "NOT SELF-CHAINING";

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "command,copula,verdict,max_identity_residual,witness_point,witness_k,"
          "max_homogeneity_residual,max_pde_residual,axioms_groundedness,axioms_margin,"
          "axioms_min_volume\n";
    os << cfg.command << ',' << csv_quote(cfg.copula.dump()) << ',' << verdict << ','
       << format_double(identity.max_residual) << ",\"";
    for (std::size_t i = 0; i < identity.argmax_point.size(); ++i) {
      if (i) os << ' ';
      os << format_double(identity.argmax_point[i]);
    }
    os << "\"," << format_double(identity.argmax_k) << ',' << format_double(homog_max) << ','
       << format_double(pde_max) << ',' << format_double(axioms.max_groundedness_violation)
       << ',' << format_double(axioms.max_margin_violation) << ','
       << format_double(axioms.min_rectangle_volume) << '\n';
    write_output(cfg, os.str());
  } else {
    json jax = axioms.to_json();
    jax["tolerance"] = cfg.tol;
    jax["passed"] = axioms_pass;
    json jid = identity.to_json();
    jid["threshold"] = kIdentityThreshold;
    jid["passed"] = identity_pass;
    json jh{{"max_residual", homog_max},
            {"argmax_point", homog_arg},
            {"argmax_k", homog_k},
            {"skipped_points", homog_skipped},
            {"threshold", kIdentityThreshold},
            {"passed", homog_pass}};
    json jp;
    if (pde_ran) {
      jp = json{{"max_abs_residual", pde_max},
                {"argmax_point", pde_arg},
                {"h", kPdeStep},
                {"threshold", pde_threshold},
                {"threshold_scaled_by_one_plus_c_log_c", true},
                {"passed", pde_pass}};
    } else {
      jp = json{{"skipped", "bivariate check only"}};
    }
    json j;
    j["command"] = cfg.command;
    j["config"] = cfg.to_json();
    j["result"] = json{{"verdict", verdict},
                       {"axioms", jax},
                       {"identity", jid},
                       {"homogeneity", jh},
                       {"pde", jp}};
    write_output(cfg, j.dump(2) + "\n");
  }
  return 0;
}

std::optional<double> analytic_tau(const CopulaSpec& spec) {
  switch (spec.family()) {
    case Family::gumbel_hougaard:
      return kendall_tau_gumbel(spec.theta());
    case Family::independence:
      return 0.0;
    case Family::comonotone:
      return 1.0;
    case Family::gaussian:
      if (spec.dim() == 2) return 2.0 / M_PI * std::asin(spec.corr(0, 1));
      return std::nullopt;
    case Family::marshall_olkin: {
      double a1 = spec.alpha1(), a2 = spec.alpha2();
      double denom = a1 + a2 - a1 * a2;
      return denom > 0.0 ? a1 * a2 / denom : 0.0;
    }
  }
  return std::nullopt;
}

int cmd_tau(const RunConfig& cfg, const CopulaSpec& spec) {
  if (spec.dim() != 2) throw ConfigError("tau estimation is bivariate", "copula");
  if (cfg.samples < 2) throw ConfigError("samples must be >= 2", "samples");

  CopulaSampler sampler(spec);
  std::vector<std::array<double, 2>> pairs(cfg.samples);
  parallel_scenarios(cfg.samples, cfg.workers, cfg.seed, [&](std::uint64_t i, RngStream& rng) {
    auto u = sampler.draw(rng);
    pairs[i] = {u[0], u[1]};
  });
  double emp = kendall_tau_empirical(pairs);
  auto ana = analytic_tau(spec);

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "command,copula,analytic_tau,empirical_tau,n_samples,seed\n"
       << cfg.command << ',' << csv_quote(cfg.copula.dump()) << ','
       << (ana ? format_double(*ana) : "") << ',' << format_double(emp) << ',' << cfg.samples
       << ',' << cfg.seed << '\n';
    write_output(cfg, os.str());
  } else {
    json j;
    j["command"] = cfg.command;
    j["config"] = cfg.to_json();
    j["result"] = json{{"analytic_tau", ana ? json(*ana) : json(nullptr)},
                       {"empirical_tau", emp},
                       {"n_samples", cfg.samples},
                       {"seed", cfg.seed}};
    write_output(cfg, j.dump(2) + "\n");
  }
  return 0;
}

PickandsFn pickands_from_spec(const CopulaSpec& spec) {
  switch (spec.family()) {
    case Family::gumbel_hougaard:
      return PickandsFn::gumbel(spec.theta());
    case Family::marshall_olkin:
      return PickandsFn::marshall_olkin(spec.alpha1(), spec.alpha2());
    case Family::independence:
      return PickandsFn::constant_one();
    case Family::comonotone:
      return PickandsFn::marshall_olkin(1.0, 1.0);
    case Family::gaussian:
      throw ConfigError("the Gaussian copula has no Pickands function (not extreme-value)",
                        "copula");
  }
  throw ConfigError("unknown family", "copula");
}

int cmd_pickands(const RunConfig& cfg, const CopulaSpec& spec) {
  if (spec.dim() != 2) throw ConfigError("pickands export is bivariate", "copula");
  if (cfg.grid_size < 3) throw ConfigError("grid-size must be >= 3", "grid_size");
  PickandsFn a = pickands_from_spec(spec);
  PickandsValidity validity = check_pickands_validity(a, cfg.grid_size, 1e-9);

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "t,A\n";
    for (int i = 0; i < cfg.grid_size; ++i) {
      double t = static_cast<double>(i) / (cfg.grid_size - 1);
      os << format_double(t) << ',' << format_double(a(t)) << '\n';
    }
    write_output(cfg, os.str());
  } else {
    json values = json::array();
    for (int i = 0; i < cfg.grid_size; ++i) {
      double t = static_cast<double>(i) / (cfg.grid_size - 1);
      values.push_back(json::array({t, a(t)}));
    }
    json jv = validity.to_json();
    jv["valid"] = validity.valid(1e-9);
    json j;
    j["command"] = cfg.command;
    j["config"] = cfg.to_json();
    j["result"] = json{{"values", values}, {"validity", jv}};
    write_output(cfg, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copula sampling and self-chaining verification for exponential arrival times"};
  app.require_subcommand(1);

  std::string copula_arg, lambdas_arg, config_path;
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--copula", copula_arg, "copula spec as inline JSON or @file");
    sub->add_option("--config", config_path, "JSON config file; explicit flags override it");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--out", cfg.out, "output path (default: stdout)");
    sub->add_option("--format", cfg.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--workers", cfg.workers, "worker threads")->check(CLI::PositiveNumber);
    return sub;
  };

  CLI::App* sim = add_common(app.add_subcommand("simulate", "draw copula samples to CSV"));
  sim->add_option("--scenarios", cfg.scenarios, "number of rows");
  sim->add_flag("--arrival-times", cfg.arrival_times, "emit exponential arrival times");
  sim->add_option("--lambdas", lambdas_arg, "comma-separated intensities");

  CLI::App* chain =
      add_common(app.add_subcommand("chain-compare", "one-shot vs iterated joint survival"));
  chain->add_option("--lambdas", lambdas_arg, "comma-separated intensities");
  chain->add_option("--periods", cfg.periods, "number of sub-periods N");
  chain->add_option("--dt", cfg.dt, "sub-period length T");
  chain->add_option("--scenarios", cfg.scenarios, "Monte Carlo scenarios");

  CLI::App* ver = add_common(app.add_subcommand("verify", "axioms + self-chaining certification"));
  ver->add_option("--rects", cfg.rects, "random rectangles for the mass check");
  ver->add_option("--tol", cfg.tol, "axiom tolerance");

  CLI::App* pick = add_common(app.add_subcommand("pickands", "dependence function export"));
  pick->add_option("--grid-size", cfg.grid_size, "points on [0,1]");

  CLI::App* tau = add_common(app.add_subcommand("tau", "analytic and empirical Kendall tau"));
  tau->add_option("--samples", cfg.samples, "sample pairs for the estimator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error(e.what());
    return kExitConfigError;
  }

  CLI::App* active = app.get_subcommands().front();
  cfg.command = active->get_name();

  try {
    // Merge the config file under explicitly passed flags.
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw ConfigError("cannot read config file: " + config_path, "config");
      json file;
      try {
        is >> file;
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what(), "config");
      }
      if (!file.is_object()) throw ConfigError("config file must hold a JSON object", "config");
      if (file.contains("command") && file.at("command").get<std::string>() != cfg.command)
        throw ConfigError("config file command disagrees with the subcommand", "command");
      auto take = [&](const char* key, auto& slot, const char* flag) {
        if (!file.contains(key)) return;
        // a flag missing from this subcommand cannot have been passed
        const CLI::Option* opt = active->get_option_no_throw(flag);
        if (opt == nullptr || opt->count() == 0)
          slot = file.at(key).get<std::decay_t<decltype(slot)>>();
      };
      if (file.contains("copula") && active->count("--copula") == 0)
        copula_arg = file.at("copula").dump();
      if (file.contains("lambdas") && active->count("--lambdas") == 0)
        cfg.lambdas = file.at("lambdas").get<std::vector<double>>();
      take("periods", cfg.periods, "--periods");
      take("dt", cfg.dt, "--dt");
      take("scenarios", cfg.scenarios, "--scenarios");
      take("seed", cfg.seed, "--seed");
      take("out", cfg.out, "--out");
      take("format", cfg.format, "--format");
      take("workers", cfg.workers, "--workers");
      take("arrival_times", cfg.arrival_times, "--arrival-times");
      take("rects", cfg.rects, "--rects");
      take("tol", cfg.tol, "--tol");
      take("grid_size", cfg.grid_size, "--grid-size");
      take("samples", cfg.samples, "--samples");
      if (cfg.format != "json" && cfg.format != "csv")
        throw ConfigError("format must be json or csv", "format");
      if (cfg.workers < 1) throw ConfigError("workers must be >= 1", "workers");
    }
    if (!lambdas_arg.empty()) cfg.lambdas = parse_lambdas(lambdas_arg);

    if (copula_arg.empty()) throw ConfigError("a copula spec is required", "copula");
    CopulaSpec spec = parse_copula(copula_arg);
    cfg.copula = spec.to_json();

    try {
      if (cfg.command == "simulate") return cmd_simulate(cfg, spec);
      if (cfg.command == "chain-compare") return cmd_chain_compare(cfg, spec);
      if (cfg.command == "verify") return cmd_verify(cfg, spec);
      if (cfg.command == "pickands") return cmd_pickands(cfg, spec);
      if (cfg.command == "tau") return cmd_tau(cfg, spec);
      throw ConfigError("unknown command", "command");
    } catch (const ConfigError&) {
      throw;  // config-level problems keep exit code 2
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    } catch (const std::exception& e) {
      emit_error(e.what());
      return kExitNumericalError;
    }
  } catch (const ConfigError& e) {
    emit_error(e.what(), e.field);
    return kExitConfigError;
  } catch (const std::exception& e) {
    emit_error(e.what());
    return kExitConfigError;
  }
}
