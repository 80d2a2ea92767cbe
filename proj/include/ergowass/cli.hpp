#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ergowass/bernstein.hpp"
#include "ergowass/error.hpp"
#include "ergowass/experiment.hpp"
#include "ergowass/measure.hpp"
#include "ergowass/plot.hpp"
#include "ergowass/process.hpp"
#include "ergowass/rates.hpp"
#include "ergowass/transport.hpp"

namespace ergowass {

using json = nlohmann::json;

/// Every knob of every subcommand. Defaults are written to
/// resolved-config.json so a run is reproducible from that file alone.
struct CliConfig {
  std::string subcommand;
  // process: "ou", "gradient" or "langevin" (quadratic potential, d = n)
  std::string process = "ou";
  std::size_t d = 1;
  double kappa = 1.0;
  double alpha = 2.0;
  double burn_in_dt = 0.01;
  double burn_in_time = kDefaultBurnIn;
  // rates
  double p = 2.0;
  double q = 100.0;
  std::string hypothesis = "H3";
  std::string mode = "expectation";  ///< expectation, as, corollary
  double eta = 1.5;
  // experiment / ascheck
  double dt = 0.05;
  std::vector<double> T_grid = dyadic_grid(6, 12);
  std::size_t replications = 10;
  std::size_t reference_size = 0;
  std::string method = "auto";
  std::size_t k = 512;
  std::size_t repeats = 4;
  int ell_max = kDefaultEllMax;
  std::size_t cap = kDefaultCostCap;
  std::string theory = "auto";  ///< auto, corollary, hypothesis
  double tolerance = 0.15;
  std::vector<double> checkpoints = dyadic_grid(6, 14);
  double as_factor = 3.0;
  bool plot = true;
  // simulate / bernstein
  double T = 50.0;
  std::vector<double> x0;  ///< empty: stationary start
  double lambda = 1.0;
  double M = 1.0;
  double sigma = 0.5;
  double q_conj = 2.0;
  std::string variant = "H3";
  double event_offset = 0.0;
  std::vector<double> deltas{0.1, 0.2, 0.3, 0.4, 0.5};
  std::size_t tail_replications = 10'000;
  // wdist
  std::vector<std::string> inputs;
  // global
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  std::string out = "ergowass-out";

  bool operator==(const CliConfig&) const = default;
};

namespace detail {

struct ConfigField {
  std::string name;
  std::function<json(const CliConfig&)> get;
  std::function<void(CliConfig&, const json&)> set;
  bool flag = true;  ///< exposed as a --name option on every subcommand
};

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
ConfigField config_field(std::string name, T CliConfig::*m, bool flag = true) {
  auto set = [m, name](CliConfig& c, const json& raw) {
    json j = raw;
    if constexpr (is_vector<T>::value) {
      if (!j.is_array()) j = json::array({j});  // a single value is a one-element list
    }
    if constexpr (std::is_same_v<T, bool>) {
      require(j.is_boolean(), ErrorKind::InvalidParameter, "key '" + name + "' expects true or false, got " + j.dump());
    } else if constexpr (std::is_unsigned_v<T>) {
      require(j.is_number_unsigned(), ErrorKind::InvalidParameter,
              "key '" + name + "' expects a non-negative integer, got " + j.dump());
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      require(j.is_number_integer(), ErrorKind::InvalidParameter, "key '" + name + "' expects an integer, got " + j.dump());
    } else if constexpr (std::is_floating_point_v<T>) {
      require(j.is_number(), ErrorKind::InvalidParameter, "key '" + name + "' expects a number, got " + j.dump());
    }
    try {
      c.*m = j.get<T>();
    } catch (const json::exception&) {
      fail(ErrorKind::InvalidParameter, "key '" + name + "' has the wrong type: " + j.dump());
    }
  };
  return {std::move(name), [m](const CliConfig& c) { return json(c.*m); }, std::move(set), flag};
}

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      config_field("subcommand", &CliConfig::subcommand, false),
      config_field("process", &CliConfig::process),
      config_field("d", &CliConfig::d),
      config_field("kappa", &CliConfig::kappa),
      config_field("alpha", &CliConfig::alpha),
      config_field("burn_in_dt", &CliConfig::burn_in_dt),
      config_field("burn_in_time", &CliConfig::burn_in_time),
      config_field("p", &CliConfig::p),
      config_field("q", &CliConfig::q),
      config_field("hypothesis", &CliConfig::hypothesis),
      config_field("mode", &CliConfig::mode),
      config_field("eta", &CliConfig::eta),
      config_field("dt", &CliConfig::dt),
      config_field("T_grid", &CliConfig::T_grid),
      config_field("replications", &CliConfig::replications),
      config_field("reference_size", &CliConfig::reference_size),
      config_field("method", &CliConfig::method),
      config_field("k", &CliConfig::k),
      config_field("repeats", &CliConfig::repeats),
      config_field("ell_max", &CliConfig::ell_max),
      config_field("cap", &CliConfig::cap),
      config_field("theory", &CliConfig::theory),
      config_field("tolerance", &CliConfig::tolerance),
      config_field("checkpoints", &CliConfig::checkpoints),
      config_field("as_factor", &CliConfig::as_factor),
      config_field("plot", &CliConfig::plot),
      config_field("T", &CliConfig::T),
      config_field("x0", &CliConfig::x0),
      config_field("lambda", &CliConfig::lambda),
      config_field("M", &CliConfig::M),
      config_field("sigma", &CliConfig::sigma),
      config_field("q_conj", &CliConfig::q_conj),
      config_field("variant", &CliConfig::variant),
      config_field("event_offset", &CliConfig::event_offset),
      config_field("deltas", &CliConfig::deltas),
      config_field("tail_replications", &CliConfig::tail_replications),
      config_field("inputs", &CliConfig::inputs, false),
      config_field("seed", &CliConfig::seed, false),
      config_field("threads", &CliConfig::threads, false),
      config_field("out", &CliConfig::out, false),
  };
  return fields;
}

inline const ConfigField& find_field(const std::string& key) {
  for (const auto& f : config_fields()) {
    if (f.name == key) return f;
  }
  fail(ErrorKind::InvalidParameter, "unknown config key '" + key + "'");
}

/// Command-line value text to JSON: JSON literals as such, "a,b,c" as a
/// list, anything else as a string.
inline json parse_value(const std::string& text) {
  auto parsed = json::parse(text, nullptr, false);
  if (!parsed.is_discarded()) return parsed;
  if (text.find(',') != std::string::npos) {
    parsed = json::parse("[" + text + "]", nullptr, false);
    if (!parsed.is_discarded()) return parsed;
  }
  return json(text);
}

inline ProcessSpec make_process(const CliConfig& c) {
  if (c.process == "ou") return OrnsteinUhlenbeck{c.d};
  if (c.process == "gradient") return GradientDiffusion{c.d, c.kappa, c.alpha, {}};
  if (c.process == "langevin") return ProcessSpec::langevin_quadratic(c.d);
  fail(ErrorKind::InvalidParameter, "unknown process '" + c.process + "' (expected ou, gradient or langevin)");
}

inline std::optional<BurnIn> make_burn_in(const CliConfig& c, const ProcessSpec& spec) {
  if (spec.has_exact_invariant()) return std::nullopt;
  return BurnIn{c.burn_in_dt, c.burn_in_time, {}};
}

inline EstimatorSpec make_estimator(const CliConfig& c) {
  EstimatorSpec e;
  e.method = parse_method(c.method);
  e.k = c.k;
  e.repeats = c.repeats;
  e.ell_max = c.ell_max;
  e.cap = c.cap;
  return e;
}

inline ExperimentConfig make_experiment(const CliConfig& c) {
  ExperimentConfig e;
  e.process = make_process(c);
  e.p = c.p;
  e.T_grid = c.T_grid;
  e.dt = c.dt;
  e.replications = c.replications;
  e.reference_size = c.reference_size;
  e.estimator = make_estimator(c);
  e.seed = c.seed;
  e.hypothesis = parse_hypothesis(c.hypothesis);
  e.q = c.q;
  e.burn_in = make_burn_in(c, e.process);
  e.threads = c.threads;
  return e;
}

/// Corollary rate where the process has one, else the hypothesis rate in
/// the state dimension.
inline RateResult experiment_theory(const CliConfig& c, const ProcessSpec& spec) {
  const bool use_corollary =
      c.theory == "corollary" || (c.theory == "auto" && ((c.process == "ou" && c.p == 2.0) || c.process == "langevin"));
  require(c.theory == "auto" || c.theory == "corollary" || c.theory == "hypothesis", ErrorKind::InvalidParameter,
          "unknown theory '" + c.theory + "' (expected auto, corollary or hypothesis)");
  if (use_corollary) {
    if (c.process == "ou") {
      require(c.p == 2.0, ErrorKind::InvalidQuery, "the OU corollary is stated for p = 2");
      return ou_corollary(static_cast<int>(c.d));
    }
    if (c.process == "langevin") return langevin_corollary(c.p, static_cast<int>(c.d));
    fail(ErrorKind::InvalidQuery, "no corollary rate for process " + c.process);
  }
  return rate_expectation(parse_hypothesis(c.hypothesis), c.p, c.q, static_cast<int>(spec.dim()));
}

inline std::ofstream open_out(const CliConfig& c, const std::string& name) {
  const auto path = std::filesystem::path(c.out) / name;
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::InvalidParameter, "cannot write " + path.string());
  return os;
}

inline std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

}  // namespace detail

inline json to_json(const CliConfig& c) {
  json j = json::object();
  for (const auto& f : detail::config_fields()) j[f.name] = f.get(c);
  return j;
}

/// Applies the keys of `j` on top of `base`; unknown keys are rejected by name.
inline CliConfig config_from_json(const json& j, CliConfig base = {}) {
  require(j.is_object(), ErrorKind::InvalidParameter, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) detail::find_field(key).set(base, value);
  return base;
}

/// Applies one `key=value` override.
inline void apply_override(CliConfig& c, const std::string& kv) {
  const auto eq = kv.find('=');
  require(eq != std::string::npos && eq > 0, ErrorKind::InvalidParameter, "override '" + kv + "' is not key=value");
  detail::find_field(kv.substr(0, eq)).set(c, detail::parse_value(kv.substr(eq + 1)));
}

inline CliConfig load_config_file(const std::string& path, CliConfig base = {}) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorKind::InvalidParameter, "cannot read config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidParameter, "config " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::move(base));
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_rate(const CliConfig& c, std::ostream& out) {
  RateResult r;
  if (c.mode == "expectation") {
    r = rate_expectation(parse_hypothesis(c.hypothesis), c.p, c.q, static_cast<int>(c.d));
  } else if (c.mode == "as") {
    r = rate_as(c.p, c.q, static_cast<int>(c.d), parse_hypothesis(c.hypothesis), c.eta);
  } else if (c.mode == "corollary") {
    if (c.process == "ou") {
      r = ou_corollary(static_cast<int>(c.d));
    } else if (c.process == "langevin") {
      r = langevin_corollary(c.p, static_cast<int>(c.d));
    } else {
      fail(ErrorKind::InvalidQuery, "no corollary rate for process " + c.process);
    }
  } else {
    fail(ErrorKind::InvalidParameter, "unknown mode '" + c.mode + "' (expected expectation, as or corollary)");
  }
  out << std::left << std::setw(12) << "hypothesis" << std::setw(10) << "p" << std::setw(10) << "q" << std::setw(6)
      << "d" << std::setw(18) << "exponent" << "log_power\n";
  out << std::setw(12) << to_string(r.hypothesis) << std::setw(10) << detail::num(c.p) << std::setw(10)
      << detail::num(c.q) << std::setw(6) << c.d << std::setw(18) << format_rational(r.exponent)
      << format_rational(r.log_power) << '\n';
  return 0;
}

inline int cmd_wdist(const CliConfig& c, std::ostream& out) {
  require(c.inputs.size() == 2, ErrorKind::InvalidParameter, "wdist needs exactly two CSV files");
  const auto a = load_csv(c.inputs[0]);
  const auto b = load_csv(c.inputs[1]);
  Rng rng(RngStream{c.seed, 0});
  const auto e = estimate_tp(a, b, c.p, detail::make_estimator(c), rng);
  out << std::setprecision(17) << e.value << '\n';
  return 0;
}

inline int cmd_simulate(const CliConfig& c, std::ostream& out) {
  const auto spec = detail::make_process(c);
  Rng rng(RngStream{c.seed, 0});
  const std::size_t m = step_count(c.T, c.dt);
  auto x0 = c.x0.empty() ? sample_invariant(spec, rng, detail::make_burn_in(c, spec)) : c.x0;
  const auto path = simulate_path(spec, m, c.dt, std::move(x0), rng);
  auto os = detail::open_out(c, "trajectory.csv");
  os << 't';
  for (std::size_t i = 1; i <= spec.dim(); ++i) os << ",x" << i;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < path.size(); ++i) {
    os << path.time(i);
    for (double v : path.state(i)) os << ',' << v;
    os << '\n';
  }
  save_csv((std::filesystem::path(c.out) / "measure.csv").string(), path.prefix_measure(m));
  out << "simulate: " << spec.name() << " dim " << spec.dim() << ", " << m << " steps of " << c.dt
      << (c.x0.empty() ? " from the invariant law" : " from x0") << " -> " << c.out << "/measure.csv\n";
  return 0;
}

inline int cmd_experiment(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const auto cfg = detail::make_experiment(c);
  const auto theory = detail::experiment_theory(c, cfg.process);
  const auto res = run_mean_experiment(cfg);
  {
    auto os = detail::open_out(c, "records.csv");
    write_records_csv(os, res);
  }
  {
    auto os = detail::open_out(c, "summary.csv");
    write_summary_csv(os, res, theory);
  }
  std::vector<std::pair<double, double>> pts;
  bool positive = true;
  for (const auto& r : res.rows) {
    pts.emplace_back(r.T, r.mean);
    positive = positive && r.mean > 0.0;
  }
  if (c.plot) {
    if (pts.size() < 2 || !positive) {
      err << "warning: fewer than 2 positive rows, no plot written\n";
    } else {
      emit_plot((std::filesystem::path(c.out) / "plot.svg").string(), pts, theory);
    }
  }
  out << "experiment: " << cfg.process.name() << " dim " << cfg.process.dim() << ", p " << c.p << ", "
      << to_string(res.method_used) << ", reference " << res.reference_size
      << (res.approximate_start ? " (approximate burn-in start)" : "") << ": ";
  if (pts.size() >= 3 && positive) {
    out << compare_to_theory(fit_loglog(pts), theory, c.tolerance).report << '\n';
  } else {
    out << "no slope fit (needs >= 3 positive rows)\n";
  }
  return 0;
}

inline int cmd_ascheck(const CliConfig& c, std::ostream& out) {
  const auto cfg = detail::make_experiment(c);
  const auto res = run_as_experiment(cfg, c.eta, c.checkpoints);
  auto os = detail::open_out(c, "as.csv");
  write_as_csv(os, res);
  out << std::setprecision(6) << "ascheck: envelope T^-" << format_rational(res.rate.exponent) << " log^"
      << format_rational(res.rate.log_power) << ", final-half max " << res.final_half_max << ", middle-third max "
      << res.middle_third_max << ", bounded within " << c.as_factor << "x: " << (res.bounded(c.as_factor) ? "yes" : "no")
      << '\n';
  return 0;
}

inline int cmd_bernstein(const CliConfig& c, std::ostream& out) {
  const auto spec = detail::make_process(c);
  BernsteinParams b;
  b.lambda = c.lambda;
  b.M = c.M;
  b.sigma = c.sigma;
  b.q_conj = c.q_conj;
  require(c.variant == "H2" || c.variant == "H3", ErrorKind::InvalidParameter, "variant must be H2 or H3");
  b.variant = c.variant == "H2" ? BernsteinVariant::H2 : BernsteinVariant::H3;
  std::vector<double> normal(spec.dim(), 0.0);
  normal[0] = 1.0;
  const EventSet a = HalfSpace{normal, c.event_offset};
  const EmpiricalTailConfig tc{c.T, c.dt, c.deltas, c.tail_replications, c.threads};
  const auto tail = empirical_tail(spec, a, tc, RngStream{c.seed, 0});
  auto os = detail::open_out(c, "bernstein.csv");
  os << "delta,empirical_prob,wilson_lo,wilson_hi,theory_bound\n" << std::setprecision(17);
  std::size_t dominated = 0;
  for (const auto& pt : tail.points) {
    const double bound = tail_bound(b, c.T, pt.delta);
    os << pt.delta << ',' << pt.probability << ',' << pt.wilson.lo << ',' << pt.wilson.hi << ',' << bound << '\n';
    if (pt.probability <= std::min(1.0, bound) + (pt.wilson.hi - pt.probability)) ++dominated;
  }
  out << "bernstein: T " << c.T << ", mu(A) " << std::setprecision(6) << tail.mu_a << ", bound dominates at "
      << dominated << "/" << tail.points.size() << " grid points\n";
  return 0;
}

/// Entry point. Exit status: 0 success, 2 usage or config error, 3 numeric
/// failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Empirical-measure transport rates for ergodic diffusions"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  std::string outdir;
  auto* o_seed = app.add_option("--seed", seed, "RNG seed");
  auto* o_threads = app.add_option("--threads", threads, "worker threads");
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", outdir, "output directory");
  app.add_option("--set", sets, "key=value override")->take_all();

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"simulate", "simulate one path and write its empirical measure"},
      {"wdist", "transport cost between two CSV measures"},
      {"rate", "evaluate a convergence-rate formula"},
      {"experiment", "estimate E T_p(mu_T, mu) over a T grid and fit the slope"},
      {"ascheck", "running-max ratio of one path against the almost-sure envelope"},
      {"bernstein", "empirical tail of an additive functional against the Bernstein bound"},
  };
  std::map<std::string, std::map<std::string, std::string>> flag_values;
  std::map<std::string, std::vector<std::string>> positional;
  std::vector<std::pair<std::string, CLI::App*>> commands;
  for (const auto& [name, help] : subs) {
    auto* sub = app.add_subcommand(name, help);
    commands.emplace_back(name, sub);
    for (const auto& f : detail::config_fields()) {
      if (f.flag) sub->add_option("--" + f.name, flag_values[name][f.name], "config key " + f.name);
    }
    if (name == "wdist") sub->add_option("inputs", positional[name], "two measure CSV files")->expected(2);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    std::string name;
    CLI::App* sub = nullptr;
    for (const auto& [n, s] : commands) {
      if (s->parsed()) {
        name = n;
        sub = s;
      }
    }
    CliConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);
    cfg.subcommand = name;
    for (const auto& s : sets) apply_override(cfg, s);
    for (const auto& f : detail::config_fields()) {
      if (f.flag && sub->count("--" + f.name) > 0) f.set(cfg, detail::parse_value(flag_values[name][f.name]));
    }
    if (!positional[name].empty()) cfg.inputs = positional[name];
    if (o_seed->count() > 0) cfg.seed = seed;
    if (o_threads->count() > 0) cfg.threads = threads;
    if (!outdir.empty()) cfg.out = outdir;

    std::filesystem::create_directories(cfg.out);
    {
      auto os = detail::open_out(cfg, "resolved-config.json");
      os << to_json(cfg).dump(2) << '\n';
    }
    if (name == "rate") return cmd_rate(cfg, out);
    if (name == "wdist") return cmd_wdist(cfg, out);
    if (name == "simulate") return cmd_simulate(cfg, out);
    if (name == "experiment") return cmd_experiment(cfg, out, err);
    if (name == "ascheck") return cmd_ascheck(cfg, out);
    if (name == "bernstein") return cmd_bernstein(cfg, out);
    err << "unknown subcommand\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_numeric() ? 3 : 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace ergowass
