#include "ews/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ews/errors.hpp"
#include "ews/parallel.hpp"
#include "ews/plot.hpp"
#include "ews/quadrature.hpp"
#include "ews/scaling.hpp"
#include "ews/simulate.hpp"
#include "ews/spectral.hpp"

namespace ews {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad parameters for a catalog lookup: reported like a CLI usage error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ArgumentError(what + ": '" + text + "' is not a number");
  }
  return v;
}

int to_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ArgumentError(what + ": '" + text + "' is not an integer");
  }
  return v;
}

std::vector<double> to_doubles(const std::string& text, const std::string& what) {
  std::vector<double> v;
  for (const auto& part : split(text, ',')) v.push_back(to_double(part, what));
  return v;
}

std::vector<int> to_ints(const std::string& text, const std::string& what) {
  std::vector<int> v;
  for (const auto& part : split(text, ',')) v.push_back(to_int(part, what));
  return v;
}

// "lo:hi" pair, e.g. "-8:-2".
std::pair<double, double> to_range(const std::string& text, const std::string& what) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw ArgumentError(what + ": expected LO:HI, got '" + text + "'");
  return {to_double(parts[0], what), to_double(parts[1], what)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string fixed(double v, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

// Splits "name:args" at the first colon.
std::pair<std::string, std::string> head_tail(const std::string& text) {
  const auto pos = text.find(':');
  if (pos == std::string::npos) return {text, {}};
  return {text.substr(0, pos), text.substr(pos + 1)};
}

CoeffMap parse_terms(const std::string& text) {
  CoeffMap coeffs;
  for (const auto& term : split(text, ';')) {
    if (trim(term).empty()) continue;
    const auto eq = term.find('=');
    if (eq == std::string::npos) throw ArgumentError("polynomial term '" + term + "': expected INDEX=COEFF");
    const MultiIndex j(to_ints(term.substr(0, eq), "polynomial index"));
    const double a = to_double(term.substr(eq + 1), "polynomial coefficient");
    if (a != 0.0) coeffs[j] += a;
  }
  if (coeffs.empty()) throw ArgumentError("polynomial: no non-zero term in '" + text + "'");
  return coeffs;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EWS_THREADS")) {
    try {
      const int n = to_int(env, "EWS_THREADS");
      if (n > 0) return n;
    } catch (const ArgumentError&) {
    }
  }
  return default_threads();
}

// ------------------------------------------------------------------ output

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir = ".";
  std::string config;
};

// Collects output files; everything is written after the computation.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
  // A file written directly by a library routine.
  void external(const std::string& name) { external_.push_back(name); }
  const fs::path& dir() const { return dir_; }

  std::vector<std::string> flush() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    std::vector<std::string> names;
    for (const auto& [name, content] : files_) {
      const fs::path path = dir_ / name;
      std::ofstream os(path, std::ios::binary);
      if (!os) throw ConfigError("cannot write '" + path.string() + "'");
      os << content;
      names.push_back(name);
    }
    names.insert(names.end(), external_.begin(), external_.end());
    return names;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
  std::vector<std::string> external_;
};

// Option values of a subcommand as given (or defaulted), keyed by long name.
json capture_options(const CLI::App* sub) {
  json opts = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string key = "--" + opt->get_lnames().front();
    if (key == "--help") continue;
    if (opt->get_items_expected_max() == 0) {
      opts[key] = opt->count() > 0;
      continue;
    }
    if (opt->count() > 0) {
      const auto& r = opt->results();
      opts[key] = r.size() == 1 ? json(r.front()) : json(r);
    } else if (!opt->get_default_str().empty()) {
      opts[key] = opt->get_default_str();
    }
  }
  return opts;
}

void write_manifest(const Outputs& outputs, const std::string& command, const json& options, const json& resolved,
                    const Globals& g, std::chrono::steady_clock::time_point start) {
  const auto names = outputs.flush();
  json m;
  m["command"] = command;
  m["options"] = options;
  m["resolved"] = resolved;
  m["seed"] = g.seed;
  m["version"] = kVersion;
  m["outputs"] = names;
  m["duration_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string base = command;
  std::replace(base.begin(), base.end(), ' ', '_');
  const fs::path path = outputs.dir() / (base + ".manifest.json");
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  os << m.dump(2) << '\n';
}

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream os;
  write_sweep_csv(os, sweep);
  return os.str();
}

// ------------------------------------------------------------------ laws

std::string law_line(const ScalingLaw& law, const std::string& row) { return law.describe() + " (" + row + ")"; }

std::string nd_line(const MultiIndex& j, double eps) {
  const auto [reduced, factor] = dimension_reduce(j, eps);
  std::string note;
  if (reduced.dim() != j.dim()) note = "; reduced to " + reduced.to_string() + ", factor " + fmt(factor);
  if (reduced.dim() == 1) return law_line(law_1d(reduced[0]), catalog_row_1d(reduced[0]) + note);
  if (reduced.dim() > 3) throw ArgumentError("upper-bound laws cover dimensions 2 and 3");
  return law_line(law_upper_bound(reduced), catalog_row_nd(reduced) + note);
}

std::string poly_line(const CoeffMap& coeffs, double eps) {
  const int dim = coeffs.begin()->first.dim();
  if (dim == 1) {
    std::map<int, double> c1;
    for (const auto& [j, a] : coeffs) c1[j[0]] = a;
    const auto law = law_analytic_1d(c1);
    int lead = 0;
    for (const auto& [n, a] : c1) {
      if (a != 0.0) {
        lead = n;
        break;
      }
    }
    return law_line(law, "leading index " + std::to_string(lead) + ", " + catalog_row_1d(lead));
  }
  const auto best = best_upper_bound(coeffs, eps);
  if (predicts_convergence(coeffs)) return law_line(best, "two positive unit indices");
  const auto support = minimal_support(coeffs);
  for (const auto& j : support) {
    if (j.is_zero()) continue;
    const auto [reduced, factor] = dimension_reduce(j, eps);
    (void)factor;
    const ScalingLaw law = reduced.dim() == 1 ? law_1d(reduced[0]) : law_upper_bound(reduced);
    if (law == best) {
      const std::string row = reduced.dim() == 1 ? catalog_row_1d(reduced[0]) : catalog_row_nd(reduced);
      return law_line(best, row + " via " + j.to_string());
    }
  }
  return law_line(best, "minimal support bound");
}

std::string spectral_row(const FrequencySymbol& f) {
  switch (f.kind) {
    case FrequencyKind::Power2m:
      return "-k^" + std::to_string(2 * f.m);
    case FrequencyKind::SwiftHohenberg1D:
      return "Swift-Hohenberg 1D";
    case FrequencyKind::SwiftHohenberg2D:
      return "Swift-Hohenberg 2D";
    case FrequencyKind::ConvolutionKernel:
      return "convolution kernel";
  }
  return {};
}

// ------------------------------------------------------------------ catalog for compare

std::optional<ScalingLaw> catalog_law(const SymbolSpec& symbol, const TestFunction& g) {
  try {
    if (const auto* t = symbol.as<ToolAlpha>()) {
      const auto* pw = g.as<PowerIndicator>();
      return law_1d(t->alpha, pw ? pw->gamma : 0.0);
    }
    if (const auto* f = symbol.as<FrequencySymbol>()) return predicted_spectral_law(*f);
    if (const auto* poly = symbol.as<Polynomial>()) {
      if (symbol.dim() == 1) {
        std::map<int, double> c1;
        for (const auto& [j, a] : poly->coeffs) c1[j[0]] = a;
        return law_analytic_1d(c1);
      }
      return best_upper_bound(poly->coeffs, 1.0);
    }
  } catch (const ArgumentError&) {
  }
  return std::nullopt;
}

// ------------------------------------------------------------------ option structs

struct SweepOpts {
  std::string symbol = "tool:2";
  std::string g = "box:0,1";
  std::string decades = "-8:-2";
  int points = 24;
  double sigma = 1.0;
  std::string monomial;
  double eps = 1.0;
  double rel_tol_1d = 1e-8;
  double rel_tol_nd = 1e-6;
  bool force_generic = false;
  std::string csv = "sweep.csv";
};

struct FitOpts {
  std::string csv;
  std::string window;
  double decades = 2.0;
  std::optional<double> fixed_k;
  std::string extra_candidates;
  double tol = 0.05;
  std::string summary = "fit.txt";
};

struct SimOpts {
  std::string symbol = "tool:2";
  std::string g = "box:-1,1";
  std::string p = "-1,-0.1,-0.01";
  double L = 1.0;
  int N = 199;
  double dt = 0.01;
  long nt = 200000;
  long burn_in = -1;
  int replicas = 4;
  double sigma = 1.0;
  int rank = 0;
  bool unweighted = false;
  int batches = 32;
  std::string timeseries;
  long thin = 1;
  std::string basis_csv;
  std::string csv = "simulate.csv";
};

struct CompareOpts {
  std::string symbol = "tool:2";
  std::string g = "box:-1,1";
  double sigma = 1.0;
  std::string decades = "-8:-2";
  int points = 24;
  std::string sim_decades = "-2:0";
  int sim_points = 8;
  double L = 1.0;
  int N = 199;
  double dt = 0.01;
  long nt = 200000;
  int replicas = 4;
  int rank = 0;
  bool unweighted = false;
  std::optional<double> reference_slope;
  std::string title;
  std::string prefix = "compare";
};

struct SpectralOpts {
  std::string kind = "power2m:1";
  std::string g;
  std::string p;
  std::string decades = "-8:-2";
  int points = 24;
  double sigma = 1.0;
  std::string csv = "spectral.csv";
};

struct AppendixOpts {
  double q = 1e-6;
  std::string m = "0,1,2";
  std::string csv = "appendix_c.csv";
};

QuadratureOptions quad_opts(double rel1, double relnd, bool generic) {
  QuadratureOptions o;
  o.rel_tol_1d = rel1;
  o.rel_tol_nd = relnd;
  o.force_generic = generic;
  return o;
}

SimConfig sim_config(const SymbolSpec& symbol, const TestFunction& g, double L, int N, double dt, long nt,
                     int replicas, double sigma, bool unweighted, const Globals& globals, int threads) {
  SimConfig c;
  c.mesh = Mesh{L, N, symbol.dim()};
  c.symbol = symbol;
  c.g = g;
  c.sigma = sigma;
  c.dt = dt;
  c.nt = nt;
  c.replicas = replicas;
  c.weighted = !unweighted;
  c.seed = globals.seed;
  c.threads = threads;
  return c;
}

}  // namespace

// ------------------------------------------------------------------ grammar

SymbolSpec parse_symbol_arg(const std::string& text) {
  if (!text.empty() && text.front() == '@') return symbol_from_json(read_json_file(text.substr(1)));
  const auto [name, args] = head_tail(text);
  if (name == "tool") return SymbolSpec::tool_alpha(to_double(args, "tool alpha"));
  if (name == "poly") return SymbolSpec::polynomial(parse_terms(args));
  if (name == "radial") return SymbolSpec::radial_2d(args.empty() ? 2.0 : to_double(args, "radial exponent"));
  if (name == "zero") return SymbolSpec::zero(args.empty() ? 1 : to_int(args, "zero dimension"));
  if (name == "power2m" || name == "sh1d" || name == "sh2d" || name == "kernel") {
    return frequency_symbol(parse_frequency_arg(text));
  }
  throw ArgumentError("unknown symbol '" + text + "' (tool:A, poly:J=C;.., radial:E, zero:N, power2m:M, sh1d, sh2d, "
                      "kernel:FILE, @FILE.json)");
}

FrequencySymbol parse_frequency_arg(const std::string& text) {
  const auto [name, args] = head_tail(text);
  if (name == "power2m") {
    const int m = args.empty() ? 1 : to_int(args, "power2m order");
    if (m < 1) throw ArgumentError("power2m: order must be >= 1");
    return {FrequencyKind::Power2m, m, {}, 1.0};
  }
  if (name == "sh1d") return {FrequencyKind::SwiftHohenberg1D, 1, {}, 1.0};
  if (name == "sh2d") return {FrequencyKind::SwiftHohenberg2D, 1, {}, 1.0};
  if (name == "kernel") {
    std::ifstream in(args);
    if (!in) throw ArgumentError("cannot open kernel file '" + args + "'");
    return read_kernel_csv(in);
  }
  throw ArgumentError("unknown frequency operator '" + text + "' (power2m:M, sh1d, sh2d, kernel:FILE)");
}

TestFunction parse_probe_arg(const std::string& text) {
  if (!text.empty() && text.front() == '@') return test_function_from_json(read_json_file(text.substr(1)));
  const auto [name, args] = head_tail(text);
  if (name == "box") {
    const auto v = to_doubles(args, "box");
    if (v.empty() || v.size() % 2) throw ArgumentError("box: expected lo,hi pairs");
    Coord lo, hi;
    for (std::size_t i = 0; i < v.size(); i += 2) {
      lo.push_back(v[i]);
      hi.push_back(v[i + 1]);
    }
    return TestFunction::box(lo, hi);
  }
  if (name == "cube") {
    const auto v = split(args, ',');
    if (v.size() != 3) throw ArgumentError("cube: expected N,lo,hi");
    return TestFunction::cube(to_int(v[0], "cube dimension"), to_double(v[1], "cube lo"), to_double(v[2], "cube hi"));
  }
  if (name == "power") {
    const auto v = to_doubles(args, "power");
    if (v.size() != 2) throw ArgumentError("power: expected GAMMA,EPS");
    return TestFunction::power(v[0], v[1]);
  }
  if (name == "ball" || name == "quarter") {
    const auto v = to_doubles(args, name);
    if (v.size() != 1 && v.size() != 3) throw ArgumentError(name + ": expected R or R,cx,cy");
    const Coord centre = v.size() == 3 ? Coord{v[1], v[2]} : Coord{0.0, 0.0};
    return TestFunction::ball(v[0], centre, name == "quarter");
  }
  throw ArgumentError("unknown probe '" + text + "' (box:, cube:, power:, ball:, quarter:, @FILE.json)");
}

// ------------------------------------------------------------------ run_cli

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variance scaling laws near bifurcations of linear SPDEs with continuous spectrum", "ews"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", std::string("ews ") + kVersion);

  Globals globals;
  app.add_option("--seed", globals.seed, "Random seed");
  app.add_option("--threads", globals.threads, "Worker threads (0: EWS_THREADS or hardware)");
  app.add_option("--out", globals.out_dir, "Output directory");
  app.add_option("--config", globals.config, "Replay a manifest or JSON config {command, options}");

  // laws
  auto* laws = app.add_subcommand("laws", "Catalog law lookup");
  laws->require_subcommand(1);
  double alpha = 1.0, gamma = 0.0, eps = 1.0;
  std::string indices, coeffs_1d, terms, kind;
  auto* laws_1d = laws->add_subcommand("1d", "Tool symbol -|x|^alpha with probe x^-gamma 1_[0,eps]");
  laws_1d->add_option("--alpha", alpha)->required();
  laws_1d->add_option("--gamma", gamma);
  auto* laws_an = laws->add_subcommand("analytic", "Analytic 1D drift -sum a_n x^n");
  laws_an->add_option("--coeffs", coeffs_1d, "n:a pairs, e.g. 2:1,5:-3")->required();
  auto* laws_nd = laws->add_subcommand("nd", "Monomial upper bound int 1/(x^j - p) over [0,eps]^N");
  laws_nd->add_option("--indices", indices, "Comma list, e.g. 1,2,3")->required();
  laws_nd->add_option("--eps", eps);
  auto* laws_poly = laws->add_subcommand("poly", "Best upper bound for a polynomial drift");
  laws_poly->add_option("--terms", terms, "J=C terms separated by ';', e.g. 1,0=1;0,2=1")->required();
  laws_poly->add_option("--eps", eps);
  auto* laws_sp = laws->add_subcommand("spectral", "Fourier-multiplier operators");
  laws_sp->add_option("--kind", kind, "power2m:M | sh1d | sh2d")->required();

  // sweep
  SweepOpts so;
  auto* sweep = app.add_subcommand("sweep", "Quadrature sweep over log-spaced p");
  sweep->add_option("--symbol", so.symbol);
  sweep->add_option("--g", so.g);
  sweep->add_option("--p-decades", so.decades, "LO:HI exponents of -p");
  sweep->add_option("--points", so.points);
  sweep->add_option("--sigma", so.sigma);
  sweep->add_option("--monomial", so.monomial, "Sweep int_[0,eps]^N 1/(x^j - p) instead");
  sweep->add_option("--eps", so.eps);
  sweep->add_option("--rel-tol-1d", so.rel_tol_1d);
  sweep->add_option("--rel-tol-nd", so.rel_tol_nd);
  sweep->add_flag("--force-generic", so.force_generic);
  sweep->add_option("--csv", so.csv);

  // fit
  FitOpts fo;
  auto* fit = app.add_subcommand("fit", "Log-log regression on a sweep CSV");
  fit->add_option("--csv", fo.csv, "Input sweep CSV")->required();
  fit->add_option("--window", fo.window, "P_LO:P_HI (default: last decades)");
  fit->add_option("--decades", fo.decades);
  fit->add_option("--fixed-k", fo.fixed_k);
  fit->add_option("--extra-candidates", fo.extra_candidates, "Comma list of extra exponents");
  fit->add_option("--tol", fo.tol);
  fit->add_option("--summary", fo.summary);

  // simulate
  SimOpts mo;
  auto* simulate = app.add_subcommand("simulate", "Implicit Euler-Maruyama variance estimates");
  simulate->add_option("--symbol", mo.symbol);
  simulate->add_option("--g", mo.g);
  simulate->add_option("--p", mo.p, "Comma list of p values");
  simulate->add_option("--L", mo.L);
  simulate->add_option("--N", mo.N);
  simulate->add_option("--dt", mo.dt);
  simulate->add_option("--nt", mo.nt);
  simulate->add_option("--burn-in", mo.burn_in, "-1: from the slowest mode");
  simulate->add_option("--replicas", mo.replicas);
  simulate->add_option("--sigma", mo.sigma);
  simulate->add_option("--rank", mo.rank, "Rank-M noise on the support (0: identity Q)");
  simulate->add_flag("--unweighted", mo.unweighted, "Plain sums and unit-intensity noise");
  simulate->add_option("--batches", mo.batches);
  simulate->add_option("--timeseries", mo.timeseries, "step,proj CSV of replica 0 (first p)");
  simulate->add_option("--thin", mo.thin);
  simulate->add_option("--basis-csv", mo.basis_csv, "Dump the rank-M noise basis");
  simulate->add_option("--csv", mo.csv);

  // compare
  CompareOpts co;
  auto* compare = app.add_subcommand("compare", "Quadrature, simulation and catalog in one log-log plot");
  compare->add_option("--symbol", co.symbol);
  compare->add_option("--g", co.g);
  compare->add_option("--sigma", co.sigma);
  compare->add_option("--p-decades", co.decades);
  compare->add_option("--points", co.points);
  compare->add_option("--sim-decades", co.sim_decades);
  compare->add_option("--sim-points", co.sim_points, "0 skips the simulation");
  compare->add_option("--L", co.L);
  compare->add_option("--N", co.N);
  compare->add_option("--dt", co.dt);
  compare->add_option("--nt", co.nt);
  compare->add_option("--replicas", co.replicas);
  compare->add_option("--rank", co.rank);
  compare->add_flag("--unweighted", co.unweighted);
  compare->add_option("--reference-slope", co.reference_slope);
  compare->add_option("--title", co.title);
  compare->add_option("--prefix", co.prefix);

  // spectral
  SpectralOpts po;
  auto* spectral = app.add_subcommand("spectral", "Variance of Fourier-multiplier operators");
  spectral->add_option("--kind", po.kind, "power2m:M | sh1d | sh2d | kernel:FILE");
  spectral->add_option("--g", po.g, "Probe on the frequency domain");
  spectral->add_option("--p", po.p, "Single p; otherwise a sweep");
  spectral->add_option("--p-decades", po.decades);
  spectral->add_option("--points", po.points);
  spectral->add_option("--sigma", po.sigma);
  spectral->add_option("--csv", po.csv);

  // appendix-check
  AppendixOpts ao;
  auto* appendix = app.add_subcommand("appendix-check", "Log-power integrals against their leading term");
  appendix->add_option("--q", ao.q);
  appendix->add_option("--m", ao.m, "Comma list of powers");
  appendix->add_option("--csv", ao.csv);

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    // Replay: rebuild the argument list from the config and run it.
    if (!globals.config.empty()) {
      const json cfg = read_json_file(globals.config);
      if (!cfg.contains("command")) throw ConfigError("config: missing 'command'");
      std::vector<std::string> replay{args.empty() ? "ews" : args.front()};
      const std::uint64_t seed = cfg.value("seed", globals.seed);
      replay.insert(replay.end(), {"--seed", std::to_string(seed), "--out", globals.out_dir});
      if (globals.threads > 0) replay.insert(replay.end(), {"--threads", std::to_string(globals.threads)});
      for (const auto& token : split(cfg.at("command").get<std::string>(), ' ')) replay.push_back(token);
      if (cfg.contains("options")) {
        for (const auto& [key, value] : cfg.at("options").items()) {
          const std::string flag = key.rfind("--", 0) == 0 ? key : "--" + key;
          if (value.is_boolean()) {
            if (value.get<bool>()) replay.push_back(flag);
          } else if (value.is_array()) {
            for (const auto& v : value) {
              replay.push_back(flag);
              replay.push_back(v.is_string() ? v.get<std::string>() : v.dump());
            }
          } else {
            replay.push_back(flag);
            replay.push_back(value.is_string() ? value.get<std::string>() : value.dump());
          }
        }
      }
      return run_cli(replay, out, err);
    }
    if (app.get_subcommands().empty()) {
      err << app.help();
      return exit_code::usage;
    }
    const int threads = resolve_threads(globals.threads);
    Outputs outputs{fs::path(globals.out_dir)};

    if (laws->parsed()) {
      try {
        if (laws_1d->parsed()) {
          if (!(alpha > 0.0)) throw UsageError("--alpha must be > 0 (Table 1: f = -|x|^alpha, alpha > 0)");
          if (!(gamma >= 0.0 && gamma < 0.5)) {
            throw UsageError("--gamma must lie in [0, 1/2) (Table 2: g = x^-gamma 1_[0,eps] square integrable)");
          }
          out << law_line(law_1d(alpha, gamma), catalog_row_1d(alpha, gamma)) << '\n';
        } else if (laws_an->parsed()) {
          std::map<int, double> c;
          for (const auto& pair : split(coeffs_1d, ',')) {
            const auto [n, a] = head_tail(pair);
            c[to_int(n, "index")] = to_double(a, "coefficient");
          }
          if (c.empty() || c.begin()->first < 1) {
            throw UsageError("--coeffs indices must be >= 1 (f = -sum_{n>=1} a_n x^n)");
          }
          const auto law = law_analytic_1d(c);
          int lead = 0;
          for (const auto& [n, a] : c) {
            if (a != 0.0) {
              lead = n;
              break;
            }
          }
          out << law_line(law, "leading index " + std::to_string(lead) + ", " + catalog_row_1d(lead)) << '\n';
        } else if (laws_nd->parsed()) {
          const MultiIndex j(to_ints(indices, "--indices"));
          if (j.dim() < 1 || j.dim() > 3) throw UsageError("--indices needs 1 to 3 components (Tables 3 and 4: N = 2, 3)");
          for (int c : j.components()) {
            if (c < 0) throw UsageError("--indices must be non-negative integers");
          }
          if (!(eps > 0.0)) throw UsageError("--eps must be > 0");
          out << nd_line(j, eps) << '\n';
        } else if (laws_poly->parsed()) {
          out << poly_line(parse_terms(terms), eps) << '\n';
        } else if (laws_sp->parsed()) {
          const auto f = parse_frequency_arg(kind);
          out << law_line(predicted_spectral_law(f), spectral_row(f)) << '\n';
        }
      } catch (const NoBifurcation& e) {
        throw UsageError(e.what());
      } catch (const ArgumentError& e) {
        throw UsageError(e.what());
      }
      return exit_code::ok;
    }

    if (sweep->parsed()) {
      const auto [lo, hi] = to_range(so.decades, "--p-decades");
      const auto ps = log_spaced_p(lo, hi, so.points);
      const auto opt = quad_opts(so.rel_tol_1d, so.rel_tol_nd, so.force_generic);
      SweepResult result;
      json resolved;
      if (!so.monomial.empty()) {
        const MultiIndex j(to_ints(so.monomial, "--monomial"));
        result = sweep_monomial(j, so.eps, ps, opt, threads);
        resolved["monomial"] = j.components();
        resolved["eps"] = so.eps;
      } else {
        VarianceQuery base{parse_symbol_arg(so.symbol), parse_probe_arg(so.g), ps.front(), so.sigma};
        result = sweep_quadrature(base, ps, opt, threads);
        resolved["symbol"] = base.symbol;
        resolved["g"] = base.g;
      }
      outputs.add(so.csv, sweep_csv(result));
      write_manifest(outputs, "sweep", capture_options(sweep), resolved, globals, start);
      out << "wrote " << (outputs.dir() / so.csv).string() << " (" << result.points.size() << " points)\n";
      return exit_code::ok;
    }

    if (fit->parsed()) {
      std::ifstream in(fo.csv);
      if (!in) throw ArgumentError("cannot open '" + fo.csv + "'");
      const auto data = read_sweep_csv(in);
      FitWindow w = default_window(data, fo.decades);
      if (!fo.window.empty()) {
        const auto [a, b] = to_range(fo.window, "--window");
        w = {a, b};
      }
      const auto result = fit_loglog(data, w, fo.fixed_k);
      const auto extras = fo.extra_candidates.empty() ? std::vector<double>{}
                                                      : to_doubles(fo.extra_candidates, "--extra-candidates");
      const auto cls = classify(result.s_hat, result.k_hat, default_candidates(extras), fo.tol);
      std::ostringstream summary;
      summary << kFitSummaryHeader << '\n' << fit_summary_line(result, cls) << '\n';
      outputs.add(fo.summary, summary.str());
      json resolved{{"window", {w.p_lo, w.p_hi}}, {"points", result.points}};
      write_manifest(outputs, "fit", capture_options(fit), resolved, globals, start);
      out << summary.str();
      return exit_code::ok;
    }

    if (simulate->parsed()) {
      const auto symbol = parse_symbol_arg(mo.symbol);
      const auto g = parse_probe_arg(mo.g);
      const auto ps = to_doubles(mo.p, "--p");
      std::ostringstream rows, sweep_rows;
      rows << "p,variance,stderr,mean,effective_samples,log10_spread,burn_in,predicted\n";
      rows << std::setprecision(17);
      SweepResult sim;
      sim.source = SweepSource::Simulation;
      std::vector<std::pair<double, VarianceEstimate>> estimates;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        SimConfig c = sim_config(symbol, g, mo.L, mo.N, mo.dt, mo.nt, mo.replicas, mo.sigma, mo.unweighted,
                                 globals, threads);
        c.p = ps[i];
        c.batches = mo.batches;
        if (mo.burn_in >= 0) c.burn_in = mo.burn_in;
        if (mo.rank > 0) {
          c.noise = support_noise(c, mo.rank, globals.seed);
          if (i == 0 && !mo.basis_csv.empty()) {
            std::ostringstream b;
            write_basis_csv(b, *c.noise);
            outputs.add(mo.basis_csv, b.str());
          }
        }
        if (i == 0 && !mo.timeseries.empty()) {
          c.timeseries_path = (outputs.dir() / mo.timeseries).string();
          std::error_code ec;
          fs::create_directories(outputs.dir(), ec);
          c.thin = mo.thin;
          outputs.external(mo.timeseries);
        }
        const auto est = run(c);
        const double pred = predict_discrete_variance(c);
        rows << ps[i] << ',' << est.variance << ',' << est.std_error << ',' << est.mean << ','
             << est.effective_samples << ',' << est.log10_spread << ',' << est.burn_in << ',' << pred << '\n';
        out << "p=" << fmt(ps[i]) << " variance=" << fmt(est.variance) << " stderr=" << fmt(est.std_error)
            << " predicted=" << fmt(pred) << '\n';
        sim.points.push_back({ps[i], est.variance, est.std_error});
      }
      std::sort(sim.points.begin(), sim.points.end(), [](const auto& a, const auto& b) { return a.p < b.p; });
      outputs.add(mo.csv, rows.str());
      const std::string sweep_name = fs::path(mo.csv).stem().string() + "_sweep.csv";
      outputs.add(sweep_name, sweep_csv(sim));
      json resolved{{"symbol", symbol}, {"g", g}};
      auto opts = capture_options(simulate);
      write_manifest(outputs, "simulate", opts, resolved, globals, start);
      if (!mo.timeseries.empty()) out << "time series: " << (outputs.dir() / mo.timeseries).string() << '\n';
      return exit_code::ok;
    }

    if (compare->parsed()) {
      const auto symbol = parse_symbol_arg(co.symbol);
      const auto g = parse_probe_arg(co.g);
      const auto [lo, hi] = to_range(co.decades, "--p-decades");
      const auto ps = log_spaced_p(lo, hi, co.points);
      VarianceQuery base{symbol, g, ps.front(), co.sigma};
      const auto quad = sweep_quadrature(base, ps, {}, threads);
      const std::string quad_name = co.prefix + "_quadrature.csv";
      const std::string sim_name = co.prefix + "_simulation.csv";
      outputs.add(quad_name, sweep_csv(quad));
      std::optional<SweepResult> sim;
      if (co.sim_points > 0) {
        const auto [slo, shi] = to_range(co.sim_decades, "--sim-decades");
        SweepResult s;
        s.source = SweepSource::Simulation;
        for (double p : log_spaced_p(slo, shi, co.sim_points)) {
          SimConfig c = sim_config(symbol, g, co.L, co.N, co.dt, co.nt, co.replicas, co.sigma, co.unweighted,
                                   globals, threads);
          c.p = p;
          if (co.rank > 0) c.noise = support_noise(c, co.rank, globals.seed);
          const auto est = run(c);
          s.points.push_back({p, est.variance, est.std_error});
        }
        outputs.add(sim_name, sweep_csv(s));
        sim = std::move(s);
      }

      // The plot is drawn from the CSV text, never from the in-memory sweeps.
      std::istringstream quad_in(sweep_csv(quad));
      const auto quad_view = read_sweep_csv(quad_in);
      std::optional<SweepResult> sim_view;
      if (sim) {
        std::istringstream sim_in(sweep_csv(*sim));
        sim_view = read_sweep_csv(sim_in);
      }

      const auto law = catalog_law(symbol, g);
      const double k_fixed = law && !law->convergent ? law->k : 0.0;
      PlotSpec plot;
      plot.title = co.title.empty() ? symbol.describe() + ", g = " + g.describe() : co.title;
      plot.series.push_back({"quadrature", quad_view, "#1f77b4", true});
      if (sim_view) plot.series.push_back({"simulation", *sim_view, "#d62728", true});

      std::ostringstream summary;
      summary << "series,s_hat,s_stderr,k,points\n";
      auto fit_series = [&](const std::string& label, const SweepResult& s, FitWindow w) -> std::optional<FitResult> {
        try {
          const auto f = fit_loglog(s, w, k_fixed);
          summary << label << ',' << fmt(f.s_hat, 10) << ',' << fmt(f.s_stderr, 4) << ',' << k_fixed << ','
                  << f.points << '\n';
          return f;
        } catch (const FitError& e) {
          out << label << ": no fit (" << e.what() << ")\n";
          return std::nullopt;
        }
      };
      const auto qfit = fit_series("quadrature", quad_view, default_window(quad_view));
      if (qfit) {
        plot.annotations.push_back("quadrature: fitted slope " + fixed(qfit->s_hat, 3) + " ± " +
                                   fixed(std::max(qfit->s_stderr, 0.001), 3));
      }
      if (sim_view) {
        const FitWindow all{-std::numeric_limits<double>::infinity(), 0.0};
        if (const auto sfit = fit_series("simulation", *sim_view, all)) {
          plot.annotations.push_back("simulation: fitted slope " + fixed(sfit->s_hat, 3) + " ± " +
                                     fixed(std::max(sfit->s_stderr, 0.001), 3));
        }
      }
      std::optional<double> slope = co.reference_slope;
      std::string ref_label;
      if (law) {
        plot.annotations.push_back("catalog: " + law->describe());
        if (!slope && !law->convergent) slope = law->s;
      }
      if (slope && !quad_view.points.empty()) {
        const auto& pt = quad_view.points.back();
        plot.reference = ReferenceLine{*slope, std::log10(-pt.p), std::log10(pt.value), "slope " + fmt(*slope, 4)};
      }
      std::ostringstream svg;
      write_loglog_svg(svg, plot);
      outputs.add(co.prefix + ".svg", svg.str());
      outputs.add(co.prefix + "_fit.csv", summary.str());
      json resolved{{"symbol", symbol}, {"g", g}};
      write_manifest(outputs, "compare", capture_options(compare), resolved, globals, start);
      for (const auto& a : plot.annotations) out << a << '\n';
      out << "wrote " << (outputs.dir() / (co.prefix + ".svg")).string() << '\n';
      return exit_code::ok;
    }

    if (spectral->parsed()) {
      FrequencyQuery q;
      q.kind = parse_frequency_arg(po.kind);
      q.sigma = po.sigma;
      if (!po.g.empty()) {
        q.ghat = parse_probe_arg(po.g);
      } else if (q.kind.kind == FrequencyKind::SwiftHohenberg2D) {
        q.ghat = TestFunction::ball(std::sqrt(2.0));
      } else if (q.kind.kind == FrequencyKind::SwiftHohenberg1D) {
        q.ghat = TestFunction::cube(1, 0.0, 2.0);
      }
      const bool touches = touches_zero_set(q);
      out << "operator: " << spectral_row(q.kind) << '\n';
      out << "probe: " << q.ghat.describe() << (touches ? " (meets the zero set)" : " (misses the zero set: bounded)")
          << '\n';
      if (q.kind.kind != FrequencyKind::ConvolutionKernel) {
        out << "catalog: " << predicted_spectral_law(q.kind).describe() << '\n';
      }
      if (!po.p.empty()) {
        q.p = to_double(po.p, "--p");
        out << "p=" << fmt(q.p) << " variance=" << fmt(variance_spectral(q), 12) << '\n';
        return exit_code::ok;
      }
      const auto [lo, hi] = to_range(po.decades, "--p-decades");
      const auto ps = log_spaced_p(lo, hi, po.points);
      SweepResult s;
      s.points.resize(ps.size());
      parallel_for(ps.size(), threads, [&](std::size_t i) {
        FrequencyQuery qi = q;
        qi.p = ps[i];
        s.points[i] = {ps[i], variance_spectral(qi), 0.0};
      });
      outputs.add(po.csv, sweep_csv(s));
      try {
        const auto f = fit_loglog(s, default_window(s));
        out << "fit: s_hat=" << fmt(f.s_hat, 4) << " k_hat=" << fmt(f.k_hat, 3) << '\n';
      } catch (const FitError& e) {
        out << "fit: " << e.what() << '\n';
      }
      json resolved{{"symbol", frequency_symbol(q.kind)}, {"g", q.ghat}};
      write_manifest(outputs, "spectral", capture_options(spectral), resolved, globals, start);
      out << "wrote " << (outputs.dir() / po.csv).string() << '\n';
      return exit_code::ok;
    }

    if (appendix->parsed()) {
      if (!(ao.q > 0.0 && ao.q < 1.0)) throw ArgumentError("--q must lie in (0, 1)");
      const double log_inv = std::log(1.0 / ao.q);
      std::ostringstream csv;
      csv << "m,q,value,leading,ratio,target\n" << std::setprecision(17);
      for (int m : to_ints(ao.m, "--m")) {
        if (m < 0) throw ArgumentError("--m must be non-negative");
        const double v = appendix_c_integral(m, ao.q);
        const double lead = std::pow(log_inv, m + 1);
        const double ratio = v / lead;
        const double target = 1.0 / (m + 1);
        csv << m << ',' << ao.q << ',' << v << ',' << lead << ',' << ratio << ',' << target << '\n';
        out << "m=" << m << " value=" << fmt(v, 10) << " ratio=" << fmt(ratio, 6) << " target=" << fmt(target, 6)
            << " rel_dev=" << fmt(ratio / target - 1.0, 3);
        if (m == 0) {
          const double qi = 1.0 / ao.q;
          const double closed = std::log(qi + 1.0) + 1.0 / (qi + 1.0) - 1.0;
          out << " closed_form_rel_err=" << fmt(std::abs(v / closed - 1.0), 3);
        }
        out << '\n';
      }
      outputs.add(ao.csv, csv.str());
      write_manifest(outputs, "appendix-check", capture_options(appendix), json::object(), globals, start);
      return exit_code::ok;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::validation;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::validation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::validation;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_code::numerical;
  } catch (const FitError& e) {
    err << "fit failed: " << e.what() << '\n';
    return exit_code::numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code::ok;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run_cli(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace ews
