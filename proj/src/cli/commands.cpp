#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thermolux/capacity_solver.hpp"
#include "thermolux/cli.hpp"
#include "thermolux/errors.hpp"
#include "thermolux/photon_channel.hpp"
#include "thermolux/radiometry.hpp"
#include "thermolux/readout_sim.hpp"

namespace thermolux::cli {
namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CapacityArgs {
  double xm = 0.0;
  std::size_t grid = 2001;
  double tol = 1e-9;
  std::size_t max_iters = 20000;
  double support_floor = 1e-6;
  std::size_t probes = 2001;
};

struct RadiometryArgs {
  double area = 1.0;
  std::string solid_angle = "2pi";
  double tau = 1.0;
  std::string nu_lo = "0";
  std::string nu_hi = "inf";
  std::string model = "planck:6000";
};

struct ThresholdArgs {
  double lo = 0.85;
  double hi = 0.95;
  double resolution = 1e-3;
  std::size_t probes = 2001;
};

struct SimulateArgs {
  double xm = 0.0;
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 1;
  std::uint64_t oscillators = 0;
  double temperature = 6000.0;
};

double parse_real(const std::string& text, const std::string& what) {
  if (text == "2pi") return 2.0 * std::numbers::pi;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (errno != 0 || end == text.c_str() || *end != '\0') throw DomainError(what + ": not a number: " + text);
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// key=value lines, '#' comments. Each pair becomes --key=value.
std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    tokens.push_back("--" + trim(body.substr(0, eq)) + "=" + trim(body.substr(eq + 1)));
  }
  return tokens;
}

// Moves --config out of `args` and splices its key=value pairs in right
// after the subcommand name, ahead of explicit flags.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> injected;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      continue;
    }
    const auto more = read_config(path);
    injected.insert(injected.end(), more.begin(), more.end());
    --i;
  }
  if (injected.empty()) return args;
  const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
  if (sub == args.end()) throw UsageError("--config needs a subcommand");
  args.insert(sub + 1, injected.begin(), injected.end());
  return args;
}

json levels_of(const InputDistribution& f) {
  json out = json::array();
  for (const Atom& a : f.atoms()) out.push_back(a.level.value());
  return out;
}

json weights_of(const InputDistribution& f) {
  json out = json::array();
  for (const Atom& a : f.atoms()) out.push_back(a.weight);
  return out;
}

Envelope cmd_capacity(const CapacityArgs& a) {
  Envelope env("capacity");
  env.input("xm", a.xm);
  env.input("grid", a.grid);
  env.input("tol", a.tol);
  env.input("max_iters", a.max_iters);
  env.input("support_floor", a.support_floor);
  env.input("probes", a.probes);

  const SignalLevel xm(a.xm);
  if (!(a.xm > 0.0)) throw DomainError("--xm must lie in (0, 1)");
  SolverConfig cfg;
  cfg.grid_points = a.grid;
  cfg.tol = a.tol;
  cfg.max_iters = a.max_iters;
  cfg.support_weight_floor = a.support_floor;

  const double closed = two_point_capacity(xm);
  const CapacityResult solved = solve_capacity(xm, cfg);
  const KktReport kkt = verify_two_point_kkt(xm, a.probes);

  env.result("closed_form_nats", closed, "nats");
  env.result("closed_form_bits", closed / std::numbers::ln2, "bits");
  env.result("two_point_levels", levels_of(optimal_two_point_distribution(xm)), "dimensionless");
  env.result("two_point_weights", weights_of(optimal_two_point_distribution(xm)), "probability");
  env.result("solver_nats", solved.capacity_nats, "nats");
  env.result("solver_upper_bound_nats", solved.upper_bound_nats, "nats");
  env.result("solver_bracket_width", solved.kkt_max_violation, "nats");
  env.result("solver_minus_closed_form", solved.capacity_nats - closed, "nats");
  env.result("solver_converged", solved.converged, "flag");
  env.result("solver_iterations", solved.iterations, "count");
  env.result("support_levels", levels_of(solved.distribution), "dimensionless");
  env.result("support_weights", weights_of(solved.distribution), "probability");
  env.result("two_point_kkt_max_excess", kkt.max_excess_nats, "nats");
  env.result("two_point_kkt_optimal", kkt.is_optimal, "flag");
  env.result("two_point_kkt_argmax_level", kkt.argmax_level, "dimensionless");

  if (xm.mean_occupation() > kTwoLevelOccupationLimit) {
    env.warn("mean occupation x_m/(1-x_m) exceeds 9; the two-level closed form is not claimed optimal here");
  }
  if (!kkt.is_optimal) {
    env.warn("two-point law violates the KKT condition at this x_m; solver capacity exceeds the closed form");
  }
  if (!solved.converged) env.warn("solver stopped at max_iters before the bracket closed to tol");

  env.formula("count law p(n|x) = (1 - x) x^n");
  env.formula("two-point capacity I_m = ln[1 + x_m (1 - x_m)^((1 - x_m)/x_m)]");
  env.formula("two-point weight x_0/x_m = 1 / ((1 - x_m)^((x_m - 1)/x_m) + x_m)");
  env.formula("KKT: D(x) = sum_n p(n|x) ln(p(n|x)/q(n)) <= C on [0, x_m]");
  env.tolerance("solver_tol", a.tol);
  env.tolerance("kkt_tolerance", kKktTolerance);
  env.tolerance("tail_epsilon", kDefaultTailEpsilon);
  env.tolerance("support_weight_floor", a.support_floor);
  return env;
}

Envelope cmd_constants(bool recompute) {
  Envelope env("constants");
  env.input("recompute", recompute);
  const Integral sigma = recompute ? sigma_integral() : sigma_constant();
  const Integral eta = recompute ? eta_integral() : eta_constant();
  const double ratio = sigma.value / eta.value;

  env.result("sigma", sigma.value, "dimensionless");
  env.result("sigma_error_estimate", sigma.error, "dimensionless");
  env.result("eta", eta.value, "dimensionless");
  env.result("eta_error_estimate", eta.error, "dimensionless");
  env.result("nats_per_photon", ratio, "nats/photon");
  env.result("bits_per_photon", ratio / std::numbers::ln2, "bits/photon");

  env.formula("sigma = int_0^inf u^2 ln(1 + e^-u (1 - e^-u)^(e^u - 1)) du");
  env.formula("eta = int_0^inf u^2 (1 - e^-u)^(e^u - 1) / ((e^u - 1) + (1 - e^-u)^(e^u)) du");
  env.formula("information per photon = sigma / eta");
  env.tolerance("quadrature_relative", kConstantRelativeTolerance);
  env.tolerance("dimensionless_cut", kDimensionlessCut);
  env.note("integrand_forms",
           "sigma integrates the per-oscillator capacity ln(1 + x (1 - x)^((1 - x)/x)) with x = e^-u; "
           "eta weights the mean count by the two-point top weight, with denominator (e^u - 1)");
  return env;
}

Envelope cmd_radiometry(const RadiometryArgs& a) {
  Envelope env("radiometry");
  env.input("area", a.area);
  env.input("solid_angle", a.solid_angle);
  env.input("tau", a.tau);
  env.input("nu_lo", a.nu_lo);
  env.input("nu_hi", a.nu_hi);
  env.input("model", a.model);

  const PhysicalConstants constants;
  RadiometricScene scene;
  scene.area = a.area;
  scene.solid_angle = parse_real(a.solid_angle, "--solid-angle");
  scene.duration = a.tau;
  scene.band = {parse_real(a.nu_lo, "--nu-lo"), parse_real(a.nu_hi, "--nu-hi")};

  const auto colon = a.model.find(':');
  if (colon == std::string::npos) throw DomainError("--model must be planck:T or flat:rP");
  const std::string kind = a.model.substr(0, colon);
  const double param = parse_real(a.model.substr(colon + 1), "--model");
  if (kind == "planck") {
    scene.model = SignalModel::planck(param, constants);
  } else if (kind == "flat") {
    scene.model = SignalModel::flat(param);
  } else {
    throw DomainError("unknown signal model '" + kind + "'");
  }

  for (auto& w : validate_scene(scene, constants)) env.warn(std::move(w));

  if (scene.band.bounded()) {
    const DegreesOfFreedom dof = degrees_of_freedom(scene, constants);
    const ResolutionCell cell = resolution_cell(scene, scene.band.center(), constants);
    env.result("modes_spatial", dof.spatial, "modes");
    env.result("modes_temporal", dof.temporal, "modes");
    env.result("modes_total", dof.total, "modes");
    env.result("resolution_cell_area", cell.area, "m^2");
    env.result("resolution_cell_bandwidth", cell.bandwidth, "Hz");
  } else {
    env.warn("unbounded band: mode counts are reported only for finite bands");
  }

  const Integral info = total_info(scene, constants);
  const Integral photons = photon_count(scene, constants);
  env.result("total_info", info.value, "nats");
  env.result("total_info_error_estimate", info.error, "nats");
  env.result("total_info_bits", info.value / std::numbers::ln2, "bits");
  env.result("photons", photons.value, "photons");
  env.result("photons_error_estimate", photons.error, "photons");
  if (photons.value > 0.0) env.result("info_per_photon", info.value / photons.value, "nats/photon");

  if (scene.model.temperature()) {
    const double T = *scene.model.temperature();
    if (scene.band.lo == 0.0 && !scene.band.bounded()) {
      env.result("total_info_closed_form", planck_total_info(scene, constants), "nats");
      env.result("photons_closed_form", photon_count_total(scene, constants), "photons");
    }
    if (std::abs(scene.solid_angle - 2.0 * std::numbers::pi) <= 1e-12 * 2.0 * std::numbers::pi) {
      const double P = flux(T, constants);
      env.result("max_rate", max_rate(T, constants), "nats/(s m^2)");
      env.result("max_rate_from_flux", max_rate_from_flux(P, constants), "nats/(s m^2)");
      env.result("flux", P, "W/m^2");
    }
    env.note("planck_prefactor",
             "2 tau Omega S (kT)^3 / (c^2 h^3), from u = h nu / kT in the band integral; "
             "a c^3 h^3 printing of this prefactor is dimensionally inconsistent with the rate law");
    env.formula("Planck illumination r P = h nu / (exp(h nu / kT) - 1), x_m = exp(-h nu / kT)");
    env.formula("R_m = 4 pi (kT)^3 sigma / (c^2 h^3) = sigma sqrt(2) / (pi^2 sqrt(c)) (15 P / (pi h))^(3/4)");
    env.formula("P = 4 pi^5 (kT)^4 / (15 c^2 h^3)");
  }
  env.formula("modes G = (2 / c^2) nu^2 Omega S tau dnu");
  env.formula("I_m(nu) = ln[1 + rP/(rP + h nu) (h nu/(rP + h nu))^(h nu / rP)]");
  env.formula("J_m = (2 tau Omega S / c^2) int nu^2 I_m(nu) dnu");
  env.tolerance("band_quadrature_relative", kBandRelativeTolerance);
  env.tolerance("validity_threshold", kValidityThreshold);
  env.tolerance("two_level_occupation_limit", kTwoLevelOccupationLimit);
  return env;
}

Envelope cmd_threshold(const ThresholdArgs& a) {
  Envelope env("threshold");
  env.input("lo", a.lo);
  env.input("hi", a.hi);
  env.input("resolution", a.resolution);
  env.input("probes", a.probes);

  const ThresholdResult t = find_two_point_threshold(SignalLevel(a.lo), SignalLevel(a.hi), a.resolution, a.probes);
  env.result("crossover_level", t.crossover.value(), "dimensionless");
  env.result("crossover_mean_occupation", t.crossover.mean_occupation(), "photons");
  env.result("bracket_lo", t.bracket_lo, "dimensionless");
  env.result("bracket_hi", t.bracket_hi, "dimensionless");
  env.result("bisections", t.bisections, "count");
  env.formula("KKT: two-point law optimal iff max_x D(x) <= C + kkt_tolerance");
  env.formula("nbar = x / (1 - x)");
  env.tolerance("kkt_tolerance", kKktTolerance);
  env.tolerance("resolution", a.resolution);
  return env;
}

Envelope cmd_simulate(const SimulateArgs& a) {
  Envelope env("simulate");
  env.input("xm", a.xm);
  env.input("samples", a.samples);
  env.input("seed", a.seed);
  env.input("oscillators", a.oscillators);
  env.input("temperature", a.temperature);

  const SignalLevel xm(a.xm);
  if (!(a.xm > 0.0)) throw DomainError("--xm must lie in (0, 1)");
  SimulationConfig cfg;
  cfg.distribution = optimal_two_point_distribution(xm);
  cfg.x_max = xm;
  cfg.samples = a.samples;
  cfg.seed = a.seed;
  const SimulationReport rep = run_simulation(cfg);

  const GeometricChannel channel(xm);
  const double analytic_mi = mutual_information(cfg.distribution, channel);
  const double w = two_point_top_weight(xm);
  double analytic_map_error = 0.0;
  for (std::uint64_t n = 0; n <= channel.truncation(); ++n) {
    const std::size_t guess = map_decide(cfg.distribution, n);
    for (std::size_t atom = 0; atom < 2; ++atom) {
      if (guess != atom) analytic_map_error += cfg.distribution[atom].weight * gibbs_pmf(n, cfg.distribution[atom].level);
    }
  }

  env.result("empirical_mi", rep.empirical_mi_nats, "nats");
  env.result("mi_standard_error", rep.mi_standard_error, "nats");
  env.result("analytic_mi", analytic_mi, "nats");
  if (rep.mi_standard_error > 0.0 && std::isfinite(rep.mi_standard_error)) {
    env.result("mi_deviation", (rep.empirical_mi_nats - analytic_mi) / rep.mi_standard_error, "standard errors");
  }
  env.result("photon_mean", rep.photon_mean, "photons");
  env.result("photon_mean_standard_error", rep.photon_mean_standard_error, "photons");
  env.result("analytic_photon_mean", w * xm.mean_occupation(), "photons");
  if (rep.map_error_rate) env.result("map_error_rate", *rep.map_error_rate, "probability");
  env.result("analytic_map_error_rate", analytic_map_error, "probability");
  env.result("seed", rep.seed, "dimensionless");
  env.result("samples", rep.samples, "count");
  json hist = json::array();
  for (const auto& [key, count] : rep.count_histogram) {
    hist.push_back({{"atom", key.first}, {"n", key.second}, {"count", count}});
  }
  env.result("count_histogram", std::move(hist), "count");

  if (a.oscillators > 0) {
    const PerPhotonEstimate pp = empirical_nats_per_photon(a.temperature, a.oscillators, a.seed);
    env.result("per_photon_empirical", pp.nats_per_photon, "nats/photon");
    env.result("per_photon_standard_error", pp.standard_error, "nats/photon");
    env.result("per_photon_counted", pp.counted_nats_per_photon, "nats/photon");
    env.result("per_photon_counted_standard_error", pp.counted_standard_error, "nats/photon");
    env.result("per_photon_analytic", nats_per_photon(), "nats/photon");
  }

  env.formula("sampling n = floor(ln U / ln x), U ~ Uniform(0, 1)");
  env.formula("plug-in MI with Miller-Madow correction, jackknife standard error");
  env.formula("MAP detector, ties to the lower atom");
  env.tolerance("tail_epsilon", kDefaultTailEpsilon);
  env.note("rng", "std::mt19937_64 per block of 65536 samples, seeded splitmix64(seed + block * 0x9E3779B97F4A7C15)");
  if (!std::isfinite(rep.mi_standard_error)) env.warn("fewer than two samples: MI standard error is undefined");
  return env;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Information retrievable from thermal-light images: capacity, radiometry and simulation"};
  app.name("thermolux");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.add_option("--config", "key=value file mirroring the subcommand flags (explicit flags win)");

  std::string format = "json";
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));
  };

  CapacityArgs cap;
  auto* c = app.add_subcommand("capacity", "closed-form vs numerical capacity of the peak-constrained channel");
  c->add_option("--xm", cap.xm, "peak signal level x_m in (0, 1)")->required();
  c->add_option("--grid", cap.grid, "equispaced solver grid points on [0, x_m]")->check(CLI::Range(3, 10000000));
  c->add_option("--tol", cap.tol, "solver bracket tolerance, nats")->check(CLI::PositiveNumber);
  c->add_option("--max-iters", cap.max_iters, "solver iteration budget")->check(CLI::Range(1, 100000000));
  c->add_option("--support-floor", cap.support_floor, "weight below which atoms are pruned")->check(CLI::Range(0.0, 0.999999));
  c->add_option("--probes", cap.probes, "KKT probe points")->check(CLI::Range(100, 10000000));
  add_format(c);

  bool recompute = false;
  auto* k = app.add_subcommand("constants", "sigma, eta and information per photon");
  k->add_flag("--recompute", recompute, "bypass the cached quadratures");
  add_format(k);

  RadiometryArgs rad;
  auto* r = app.add_subcommand("radiometry", "mode count, band information and photon budget of a scene");
  r->add_option("--area", rad.area, "object area S, m^2");
  r->add_option("--solid-angle", rad.solid_angle, "aperture solid angle Omega, sr (or 2pi)");
  r->add_option("--tau", rad.tau, "observation time tau, s");
  r->add_option("--nu-lo", rad.nu_lo, "lower band edge, Hz");
  r->add_option("--nu-hi", rad.nu_hi, "upper band edge, Hz (inf allowed for planck)");
  r->add_option("--model", rad.model, "signal model planck:T (K) or flat:rP (J)");
  add_format(r);

  ThresholdArgs thr;
  auto* t = app.add_subcommand("threshold", "x_m at which two-level signaling stops being optimal");
  t->add_option("--lo", thr.lo, "bracket lower end (two-point optimal)");
  t->add_option("--hi", thr.hi, "bracket upper end (two-point not optimal)");
  t->add_option("--resolution", thr.resolution, "bisection width")->check(CLI::PositiveNumber);
  t->add_option("--probes", thr.probes, "KKT probe points")->check(CLI::Range(100, 10000000));
  add_format(t);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Monte Carlo photon counts under the two-point optimum");
  s->add_option("--xm", sim.xm, "peak signal level x_m in (0, 1)")->required();
  s->add_option("--samples", sim.samples, "number of (input, count) draws")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 62));
  s->add_option("--seed", sim.seed, "64-bit seed");
  s->add_option("--oscillators", sim.oscillators, "oscillators for the per-photon estimate (0 skips it)");
  s->add_option("--temperature", sim.temperature, "planck temperature for the per-photon estimate, K");
  add_format(s);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    Envelope env = *c   ? cmd_capacity(cap)
                   : *k ? cmd_constants(recompute)
                   : *r ? cmd_radiometry(rad)
                   : *t ? cmd_threshold(thr)
                        : cmd_simulate(sim);
    out << (format == "csv" ? env.to_csv() : env.to_json());
    return kExitOk;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "internal failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace thermolux::cli
