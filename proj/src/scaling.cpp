#include "ews/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "ews/errors.hpp"
#include "ews/parallel.hpp"

namespace ews {

std::string ScalingLaw::describe() const {
  if (convergent) return "convergent";
  std::ostringstream os;
  os << "s=" << std::setprecision(6) << s << " k=" << k;
  return os.str();
}

// ----------------------------------------------------------------- catalog

ScalingLaw law_1d(double alpha, double gamma) {
  if (!(alpha > 0.0)) throw ArgumentError("law_1d: alpha must be positive");
  if (!(gamma >= 0.0)) throw ArgumentError("law_1d: gamma must be non-negative");
  if (!(gamma < 0.5)) throw ArgumentError("law_1d: gamma must be < 1/2 (g not square integrable)");
  const double e = 2.0 * gamma + alpha;
  constexpr double tie = 1e-12;
  if (e < 1.0 - tie) return ScalingLaw::bounded();
  if (std::abs(e - 1.0) <= tie) return {0.0, 1, false};
  return {-1.0 + (1.0 - 2.0 * gamma) / alpha, 0, false};
}

ScalingLaw law_analytic_1d(const std::map<int, double>& coeffs) {
  for (const auto& [n, a] : coeffs) {
    if (n < 1) throw ArgumentError("law_analytic_1d: indices start at 1");
    if (a != 0.0) return law_1d(n);
  }
  throw ArgumentError("law_analytic_1d: no non-zero coefficient");
}

namespace {

std::vector<int> sorted_components(const MultiIndex& j) {
  auto c = j.components();
  std::sort(c.begin(), c.end());
  return c;
}

}  // namespace

ScalingLaw law_upper_bound(const MultiIndex& j) {
  if (j.dim() != 2 && j.dim() != 3) throw ArgumentError("law_upper_bound: dimension must be 2 or 3");
  const auto c = sorted_components(j);
  if (c.front() < 1) throw ArgumentError("law_upper_bound: zero component, apply dimension_reduce first");
  const int top = c.back();
  if (top == 1) return {0.0, j.dim(), false};
  const auto multiplicity = std::count(c.begin(), c.end(), top);
  return {-1.0 + 1.0 / top, static_cast<int>(multiplicity) - 1, false};
}

namespace {

// Tighter = slower divergence: larger s, then smaller k; bounded beats all.
bool tighter(const ScalingLaw& a, const ScalingLaw& b) {
  if (a.convergent != b.convergent) return a.convergent;
  if (a.s != b.s) return a.s > b.s;
  return a.k < b.k;
}

ScalingLaw bound_for(const MultiIndex& j, double eps) {
  try {
    const auto [reduced, factor] = dimension_reduce(j, eps);
    (void)factor;
    if (reduced.dim() == 1) return law_1d(reduced[0]);
    return law_upper_bound(reduced);
  } catch (const NoBifurcation&) {
    return ScalingLaw::bounded();
  }
}

}  // namespace

ScalingLaw best_upper_bound(const std::set<MultiIndex>& cplus, double eps) {
  if (cplus.empty()) throw ArgumentError("best_upper_bound: empty set");
  CoeffMap positive;
  for (const auto& j : cplus) positive[j] = 1.0;
  return best_upper_bound(positive, eps);
}

ScalingLaw best_upper_bound(const CoeffMap& coeffs, double eps) {
  if (coeffs.empty()) throw ArgumentError("best_upper_bound: empty set");
  if (coeffs.begin()->first.dim() >= 2 && predicts_convergence(coeffs)) return ScalingLaw::bounded();
  std::optional<ScalingLaw> best;
  for (const auto& j : minimal_support(coeffs)) {
    const auto law = bound_for(j, eps);
    if (!best || tighter(law, *best)) best = law;
  }
  return *best;
}

std::string catalog_row_1d(double alpha, double gamma) {
  const auto law = law_1d(alpha, gamma);
  const bool plain = gamma == 0.0;
  const std::string table = plain ? "Table 1, " : "Table 2, ";
  const std::string lhs = plain ? "α" : "2γ+α";
  if (law.convergent) return table + "0<" + lhs + "<1";
  if (law.k == 1) return table + lhs + "=1";
  return table + lhs + ">1";
}

std::string catalog_row_nd(const MultiIndex& j) {
  const auto c = sorted_components(j);
  if (c.front() < 1) throw ArgumentError("catalog_row_nd: zero component, apply dimension_reduce first");
  int row = 0;
  if (c.size() == 2) {
    const int i1 = c[0], i2 = c[1];
    if (i2 > i1) {
      row = i1 > 1 ? 1 : 2;
    } else {
      row = i1 > 1 ? 3 : 4;
    }
    return "Table 3, case " + std::to_string(row);
  }
  if (c.size() != 3) throw ArgumentError("catalog_row_nd: dimension must be 2 or 3");
  const int i1 = c[0], i2 = c[1], i3 = c[2];
  if (i1 > 1) {
    if (i3 > i2) {
      row = i2 > i1 ? 1 : 2;
    } else {
      row = i2 > i1 ? 3 : 4;
    }
  } else if (i3 > i2) {
    row = i2 > 1 ? 5 : 6;
  } else {
    row = i2 > 1 ? 7 : 8;
  }
  return "Table 4, case " + std::to_string(row);
}

// ------------------------------------------------------------------ sweeps

std::vector<double> log_spaced_p(double lo_decade, double hi_decade, int points) {
  if (!(lo_decade < hi_decade)) throw ArgumentError("log_spaced_p: lo_decade < hi_decade required");
  if (points < 2) throw ArgumentError("log_spaced_p: at least two points");
  std::vector<double> ps(points);
  for (int i = 0; i < points; ++i) {
    const double e = hi_decade + (lo_decade - hi_decade) * i / (points - 1);
    ps[i] = -std::pow(10.0, e);
  }
  return ps;
}

namespace {

void check_grid(const std::vector<double>& ps) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!(ps[i] < 0.0)) throw ArgumentError("sweep: every p must be negative");
    if (i && !(ps[i] > ps[i - 1])) throw ArgumentError("sweep: p must increase strictly toward 0-");
  }
}

}  // namespace

SweepResult sweep_quadrature(const VarianceQuery& base, const std::vector<double>& ps,
                             const QuadratureOptions& opt, int threads) {
  check_grid(ps);
  SweepResult out;
  out.points.resize(ps.size());
  parallel_for(ps.size(), threads, [&](std::size_t i) {
    VarianceQuery q = base;
    q.p = ps[i];
    out.points[i] = {ps[i], variance_quadrature(q, opt), 0.0};
  });
  return out;
}

SweepResult sweep_monomial(const MultiIndex& j, double eps, const std::vector<double>& ps,
                           const QuadratureOptions& opt, int threads) {
  check_grid(ps);
  SweepResult out;
  out.points.resize(ps.size());
  parallel_for(ps.size(), threads, [&](std::size_t i) {
    out.points[i] = {ps[i], monomial_integral(j, eps, -ps[i], opt), 0.0};
  });
  return out;
}

std::string to_string(SweepSource s) { return s == SweepSource::Quadrature ? "quadrature" : "simulation"; }

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << "p,value,stderr,source\n";
  const auto src = to_string(sweep.source);
  os << std::setprecision(17);
  for (const auto& pt : sweep.points) os << pt.p << ',' << pt.value << ',' << pt.std_error << ',' << src << '\n';
}

SweepResult read_sweep_csv(std::istream& is) {
  std::string line;
  std::size_t row = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError("sweep CSV row " + std::to_string(row) + ": " + what);
  };
  if (!std::getline(is, line)) throw ParseError("sweep CSV: empty input");
  ++row;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "p,value,stderr,source") fail("expected header 'p,value,stderr,source', got '" + line + "'");
  SweepResult out;
  std::optional<SweepSource> source;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4) fail("expected 4 fields, got " + std::to_string(cells.size()));
    double v[3];
    for (int c = 0; c < 3; ++c) {
      std::size_t used = 0;
      try {
        v[c] = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        fail("field " + std::to_string(c + 1) + " is not a number: '" + cells[c] + "'");
      }
      if (used != cells[c].size()) fail("trailing characters in field " + std::to_string(c + 1));
    }
    SweepSource s;
    if (cells[3] == "quadrature") {
      s = SweepSource::Quadrature;
    } else if (cells[3] == "simulation") {
      s = SweepSource::Simulation;
    } else {
      fail("unknown source '" + cells[3] + "'");
    }
    if (source && *source != s) fail("mixed sources in one sweep");
    source = s;
    if (!(v[0] < 0.0)) {
      throw ArgumentError("sweep CSV row " + std::to_string(row) + ": p must be negative (got " + cells[0] + ")");
    }
    if (!(v[1] > 0.0)) {
      throw ArgumentError("sweep CSV row " + std::to_string(row) + ": value must be positive");
    }
    if (!(v[2] >= 0.0)) fail("stderr must be non-negative");
    out.points.push_back({v[0], v[1], v[2]});
  }
  out.source = source.value_or(SweepSource::Quadrature);
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const SweepPoint& a, const SweepPoint& b) { return a.p < b.p; });
  return out;
}

// ------------------------------------------------------------------ fitting

FitWindow default_window(const SweepResult& sweep, double decades) {
  if (sweep.points.empty()) throw FitError("fit: empty sweep");
  double q_min = std::numeric_limits<double>::infinity();
  for (const auto& pt : sweep.points) q_min = std::min(q_min, -pt.p);
  // Widen by a hair so grid points on the boundary are kept.
  const double slack = 1.0 + 1e-9;
  return {-q_min * std::pow(10.0, decades) * slack, -q_min / slack};
}

FitResult fit_loglog(const SweepResult& sweep, FitWindow window, std::optional<double> fixed_k) {
  const double lo = std::min(window.p_lo, window.p_hi);
  const double hi = std::max(window.p_lo, window.p_hi);
  std::vector<const SweepPoint*> used;
  for (const auto& pt : sweep.points) {
    if (pt.p >= lo && pt.p <= hi) used.push_back(&pt);
  }
  if (used.size() < 8) {
    throw FitError("fit_loglog: " + std::to_string(used.size()) + " points in window, at least 8 required");
  }
  const int cols = fixed_k ? 2 : 3;
  // log(-log q) only enters when k is fitted or held non-zero.
  const bool uses_llq = !fixed_k || *fixed_k != 0.0;
  Eigen::MatrixXd a(used.size(), cols);
  Eigen::VectorXd b(used.size());
  for (std::size_t i = 0; i < used.size(); ++i) {
    const double q = -used[i]->p;
    if (!(q > 0.0)) throw FitError("fit_loglog: window points need p < 0");
    if (uses_llq && !(q < 1.0)) throw FitError("fit_loglog: window points need -1 < p < 0");
    if (!(used[i]->value > 0.0)) throw FitError("fit_loglog: values must be positive");
    const double lq = std::log(q);
    const double llq = uses_llq ? std::log(-lq) : 0.0;
    a(i, 0) = 1.0;
    a(i, 1) = lq;
    if (!fixed_k) a(i, 2) = llq;
    b(i) = std::log(used[i]->value) - (fixed_k ? *fixed_k * llq : 0.0);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) throw FitError("fit_loglog: singular design matrix");
  const Eigen::VectorXd x = qr.solve(b);
  const Eigen::VectorXd r = a * x - b;
  FitResult fit;
  fit.c_hat = x(0);
  fit.s_hat = x(1);
  fit.k_hat = fixed_k ? *fixed_k : x(2);
  fit.points = used.size();
  fit.residual = std::sqrt(r.squaredNorm() / static_cast<double>(used.size()));
  const auto dof = static_cast<double>(used.size()) - cols;
  if (dof > 0) {
    const double sigma2 = r.squaredNorm() / dof;
    const Eigen::MatrixXd cov = (a.transpose() * a).inverse() * sigma2;
    fit.s_stderr = std::sqrt(std::max(0.0, cov(1, 1)));
  }
  return fit;
}

std::vector<double> default_candidates(const std::vector<double>& extras, int max_n) {
  std::vector<double> c{0.0};
  for (int n = 2; n <= max_n; ++n) c.push_back(-1.0 + 1.0 / n);
  c.insert(c.end(), extras.begin(), extras.end());
  return c;
}

Classification classify(double s_hat, double k_hat, const std::vector<double>& candidates, double tol) {
  Classification out;
  out.s_hat = s_hat;
  out.k_hat = k_hat;
  if (!std::isfinite(s_hat) || !std::isfinite(k_hat)) return out;
  std::optional<double> best;
  for (double c : candidates) {
    if (std::abs(c - s_hat) <= tol && (!best || std::abs(c - s_hat) < std::abs(*best - s_hat))) best = c;
  }
  if (!best) return out;
  const int k = static_cast<int>(std::lround(std::clamp(k_hat, 0.0, 3.0)));
  ScalingLaw law{*best, k, false};
  if (*best == 0.0 && k == 0) law = ScalingLaw::bounded();
  out.law = law;
  return out;
}

std::string Classification::describe() const {
  if (law) return law->describe();
  std::ostringstream os;
  os << "unclassified (s_hat=" << s_hat << ", k_hat=" << k_hat << ")";
  return os.str();
}

double final_decade_change(const SweepResult& sweep) {
  if (sweep.points.size() < 2) throw ArgumentError("final_decade_change: need two points");
  const auto& last = sweep.points.back();
  const double target = -last.p * 10.0;
  // Point closest to one decade before the last.
  const SweepPoint* ref = &sweep.points.front();
  for (const auto& pt : sweep.points) {
    if (std::abs(std::log(-pt.p / target)) < std::abs(std::log(-ref->p / target))) ref = &pt;
  }
  return std::abs(last.value - ref->value) / ref->value;
}

std::string fit_summary_line(const FitResult& fit, const Classification& c) {
  std::ostringstream os;
  os << std::setprecision(10) << fit.s_hat << ',' << fit.k_hat << ',' << fit.c_hat << ',' << fit.residual << ',';
  if (c.law) {
    os << c.law->s << ',' << c.law->k;
  } else {
    os << "unclassified,unclassified";
  }
  return os.str();
}

}  // namespace ews
