#include "ews/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "ews/errors.hpp"
#include "ews/gauss_kronrod.hpp"

namespace ews {

// ------------------------------------------------------------ TestFunction

TestFunction TestFunction::box(Coord lo, Coord hi) {
  if (lo.empty() || lo.size() != hi.size() || lo.size() > 3) {
    throw ArgumentError("indicator box: lo/hi must have equal dimension 1..3");
  }
  for (std::size_t n = 0; n < lo.size(); ++n) {
    if (!(lo[n] < hi[n])) throw ArgumentError("indicator box: lo < hi required componentwise");
  }
  TestFunction g;
  g.dim_ = static_cast<int>(lo.size());
  g.kind_ = IndicatorBox{std::move(lo), std::move(hi)};
  return g;
}

TestFunction TestFunction::cube(int dim, double lo, double hi) {
  return box(Coord(dim, lo), Coord(dim, hi));
}

TestFunction TestFunction::power(double gamma, double eps) {
  if (!(gamma < 0.5)) throw ArgumentError("power indicator: gamma < 1/2 required (g in L^2)");
  if (!(eps > 0.0)) throw ArgumentError("power indicator: eps must be positive");
  TestFunction g;
  g.dim_ = 1;
  g.kind_ = PowerIndicator{gamma, eps};
  return g;
}

TestFunction TestFunction::ball(double radius, Coord centre, bool quadrant) {
  if (!(radius > 0.0)) throw ArgumentError("indicator ball: radius must be positive");
  if (centre.size() != 2) throw ArgumentError("indicator ball: two-dimensional only");
  TestFunction g;
  g.dim_ = 2;
  g.kind_ = IndicatorBall{radius, std::move(centre), quadrant};
  return g;
}

double TestFunction::eval(std::span<const double> x, std::span<const double> root) const {
  if (static_cast<int>(x.size()) != dim_) throw ArgumentError("test function: dimension mismatch");
  if (const auto* b = as<IndicatorBox>()) {
    for (int n = 0; n < dim_; ++n) {
      if (x[n] < b->lo[n] || x[n] > b->hi[n]) return 0.0;
    }
    return 1.0;
  }
  if (const auto* pw = as<PowerIndicator>()) {
    const double d = x[0] - root[0];
    if (d <= 0.0 || d > pw->eps) return 0.0;
    return std::pow(d, -pw->gamma);
  }
  const auto& ball = std::get<IndicatorBall>(kind_);
  const double dx = x[0] - ball.centre[0];
  const double dy = x[1] - ball.centre[1];
  if (ball.quadrant && (dx < 0.0 || dy < 0.0)) return 0.0;
  return dx * dx + dy * dy <= ball.radius * ball.radius ? 1.0 : 0.0;
}

Box TestFunction::bounding_box(std::span<const double> root) const {
  if (const auto* b = as<IndicatorBox>()) return Box{b->lo, b->hi};
  if (const auto* pw = as<PowerIndicator>()) return Box{{root[0]}, {root[0] + pw->eps}};
  const auto& ball = std::get<IndicatorBall>(kind_);
  Box box;
  for (int n = 0; n < 2; ++n) {
    box.lo.push_back(ball.quadrant ? ball.centre[n] : ball.centre[n] - ball.radius);
    box.hi.push_back(ball.centre[n] + ball.radius);
  }
  return box;
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  if (const auto* b = as<IndicatorBox>()) {
    os << "1_[";
    for (int n = 0; n < dim_; ++n) os << (n ? "x[" : "[") << b->lo[n] << "," << b->hi[n] << "]";
    os << "]";
  } else if (const auto* pw = as<PowerIndicator>()) {
    os << "x^-" << pw->gamma << " 1_[0," << pw->eps << "]";
  } else {
    const auto& ball = std::get<IndicatorBall>(kind_);
    os << "1_{|x-c|<=" << ball.radius << (ball.quadrant ? ", quadrant}" : "}");
  }
  return os.str();
}

void to_json(nlohmann::json& j, const TestFunction& g) {
  if (const auto* b = g.as<IndicatorBox>()) {
    j = {{"kind", "box"}, {"lo", b->lo}, {"hi", b->hi}};
  } else if (const auto* pw = g.as<PowerIndicator>()) {
    j = {{"kind", "power"}, {"gamma", pw->gamma}, {"eps", pw->eps}};
  } else {
    const auto* ball = g.as<IndicatorBall>();
    j = {{"kind", "ball"}, {"radius", ball->radius}, {"centre", ball->centre}, {"quadrant", ball->quadrant}};
  }
}

TestFunction test_function_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "box") return TestFunction::box(j.at("lo").get<Coord>(), j.at("hi").get<Coord>());
    if (kind == "power") return TestFunction::power(j.at("gamma").get<double>(), j.at("eps").get<double>());
    if (kind == "ball") {
      return TestFunction::ball(j.at("radius").get<double>(), j.value("centre", Coord{0.0, 0.0}),
                                j.value("quadrant", false));
    }
    throw ParseError("unknown test function kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("test function JSON: ") + e.what());
  }
}

// ------------------------------------------------------ special functions

double resolvent_primitive(int i, double y) {
  if (i < 1) throw ArgumentError("resolvent_primitive: exponent must be >= 1");
  if (y <= 0.0) return 0.0;
  if (i == 1) return std::log1p(y);
  if (i == 2) return std::atan(y);
  constexpr double split = 0.75;
  const auto head = [i](double t) {
    // sum_k (-1)^k t^{ik+1} / (ik+1), |t^i| < 1
    const double ti = std::pow(t, i);
    double term_pow = t;
    double sum = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const double term = term_pow / (i * k + 1);
      sum += (k % 2 ? -term : term);
      if (term < 1e-18 * std::abs(sum)) break;
      term_pow *= ti;
    }
    return sum;
  };
  if (y <= split) return head(y);
  if (y >= 1.0 / split) {
    const double total = (std::numbers::pi / i) / std::sin(std::numbers::pi / i);
    const double yi = std::pow(y, -i);
    double term_pow = y * yi;  // y^{1-i}
    double tail = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const double term = term_pow / (i * (k + 1) - 1);
      tail += (k % 2 ? -term : term);
      if (term < 1e-18 * std::abs(tail)) break;
      term_pow *= yi;
    }
    return total - tail;
  }
  // 1/(1+y^i) = -(1/i) sum_w w/(y - w) over the roots w of w^i = -1. No
  // 1 - y/w crosses the negative real axis for real y >= 0, so the
  // principal logarithm stays on one branch.
  std::complex<double> acc = 0.0;
  for (int k = 0; k < i; ++k) {
    const auto w = std::polar(1.0, std::numbers::pi * (2 * k + 1) / i);
    acc += w * std::log(1.0 - y / w);
  }
  return -acc.real() / i;
}

double appendix_c_integral(int m, double q) {
  if (m < 0) throw ArgumentError("appendix_c_integral: m must be non-negative");
  if (!(q > 0.0)) throw ArgumentError("appendix_c_integral: q must be positive");
  const double upper = 1.0 / q;
  constexpr double tol = 1e-13;
  // |log z|^m on (0, 1); the sign (-1)^m is restored below.
  auto f = [m](double z) { return z * std::pow(-std::log(z), m) / ((z + 1.0) * (z + 1.0)); };
  const double sign = m % 2 ? -1.0 : 1.0;
  double total = 0.0;
  // [0, min(1, upper)]: the log^m factor is integrable at 0.
  const double first = std::min(1.0, upper);
  auto tail = [m](double delta) {
    const double l = std::abs(std::log(delta)) + 1.0;
    return delta * delta * std::pow(l, m);
  };
  total += sign * gk::integrate_toward(f, 0.0, first, tail, {.rel_tol = tol}).value;
  if (upper > 1.0) {
    // z = e^t on [1, upper]: t^m e^{2t} / (e^t + 1)^2, smooth and O(t^m).
    auto h = [m](double t) {
      const double e = std::exp(-t);
      return std::pow(t, m) / ((1.0 + e) * (1.0 + e));
    };
    const double top = std::log(upper);
    for (double a = 0.0; a < top; a += 1.0) {
      total += gk::integrate(h, a, std::min(top, a + 1.0), tol).value;
    }
  }
  return total;
}

// ------------------------------------------------------ monomial integrals

std::pair<MultiIndex, double> dimension_reduce(const MultiIndex& j, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("dimension_reduce: eps must be positive");
  if (j.is_zero()) throw NoBifurcation();
  std::vector<int> kept;
  int zeros = 0;
  for (int n = 0; n < j.dim(); ++n) {
    if (j[n] == 0) {
      ++zeros;
    } else {
      kept.push_back(j[n]);
    }
  }
  return {MultiIndex(std::move(kept)), std::pow(eps, zeros)};
}

namespace {

// int_0^w dx / (A x^i + q)
double inner_monomial(int i, double a, double w, double q) {
  if (a <= 0.0) return w / q;
  const double s = std::pow(q / a, 1.0 / i);
  if (!std::isfinite(s)) return w / q;
  const double y = w / s;
  if (y < 1e-8) {
    // F(y) = y - y^{i+1}/(i+1) + ..., relative error y^{2i} below 1e-16
    return w / q * (1.0 - std::pow(y, i) / (i + 1));
  }
  return s / q * resolvent_primitive(i, y);
}

}  // namespace

QuadratureResult monomial_box_integral(const MultiIndex& j, std::span<const double> widths, double q,
                                       const QuadratureOptions& opt) {
  if (!(q > 0.0)) throw ArgumentError("monomial_integral: q must be positive");
  if (static_cast<int>(widths.size()) != j.dim()) throw ArgumentError("monomial_integral: widths/dim mismatch");
  if (j.dim() < 1 || j.dim() > 3) throw ArgumentError("monomial_integral: dimension must be 1..3");
  double factor = 1.0;
  std::vector<int> exps;
  std::vector<double> w;
  for (int n = 0; n < j.dim(); ++n) {
    if (!(widths[n] > 0.0)) throw ArgumentError("monomial_integral: widths must be positive");
    if (j[n] == 0) {
      factor *= widths[n];
    } else {
      exps.push_back(j[n]);
      w.push_back(widths[n]);
    }
  }
  QuadratureResult out;
  if (exps.empty()) {
    out.value = factor / q;
    return out;
  }
  gk::Budget budget(opt.max_evaluations);
  const double tol = exps.size() == 1 ? opt.rel_tol_1d : opt.rel_tol_nd;
  gk::Result r;
  if (exps.size() == 1) {
    r.value = inner_monomial(exps[0], 1.0, w[0], q);
  } else if (exps.size() == 2) {
    auto f = [&](double x1) { return inner_monomial(exps[1], std::pow(x1, exps[0]), w[1], q); };
    const double sup = w[1] / q;
    auto tail = [&](double d) { return d * sup; };
    r = gk::integrate_toward(f, 0.0, w[0], tail,
                             {.rel_tol = tol, .monotone = true, .sup_bound = sup, .budget = &budget});
  } else {
    bool inner_ok = true;
    auto f1 = [&](double x1) {
      const double a1 = std::pow(x1, exps[0]);
      auto f2 = [&](double x2) { return inner_monomial(exps[2], a1 * std::pow(x2, exps[1]), w[2], q); };
      const double sup2 = w[2] / q;
      auto tail2 = [&](double d) { return d * sup2; };
      auto r2 = gk::integrate_toward(f2, 0.0, w[1], tail2,
                                     {.rel_tol = 0.5 * tol, .monotone = true, .sup_bound = sup2, .budget = &budget});
      inner_ok = inner_ok && r2.converged;
      return r2.value;
    };
    const double sup1 = w[1] * w[2] / q;
    auto tail1 = [&](double d) { return d * sup1; };
    r = gk::integrate_toward(f1, 0.0, w[0], tail1,
                             {.rel_tol = 0.5 * tol, .monotone = true, .sup_bound = sup1, .budget = &budget});
    r.converged = r.converged && inner_ok;
  }
  out.value = factor * r.value;
  out.abs_error = factor * r.abs_error;
  out.evaluations = budget.used();
  out.converged = r.converged;
  return out;
}

double monomial_integral(const MultiIndex& j, double eps, double q, const QuadratureOptions& opt) {
  if (!(eps > 0.0)) throw ArgumentError("monomial_integral: eps must be positive");
  const std::vector<double> widths(j.dim(), eps);
  auto r = monomial_box_integral(j, widths, q, opt);
  if (!r.converged) throw NumericalFailure("monomial_integral: tolerance not met for j=" + j.to_string());
  return r.value;
}

// --------------------------------------------------------- variance routes

namespace {

bool near(double a, double b) { return std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a) + std::abs(b)); }

/// Integrate a non-negative f over [lo, hi] split at `singular` points, with
/// geometric panels toward each of them.
template <class F, class Tail>
gk::Result integrate_segments(F& f, double lo, double hi, std::vector<double> singular, Tail&& tail,
                              const gk::TowardOptions& base) {
  std::sort(singular.begin(), singular.end());
  auto is_singular = [&](double x) {
    return std::any_of(singular.begin(), singular.end(), [&](double s) { return near(s, x); });
  };
  std::vector<double> cuts{lo};
  for (double s : singular) {
    if (s > lo && s < hi && !near(s, lo) && !near(s, hi) && !near(s, cuts.back())) cuts.push_back(s);
  }
  cuts.push_back(hi);

  gk::Result total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const bool sa = is_singular(a);
    const bool sb = is_singular(b);
    if (sa && sb) {
      const double mid = 0.5 * (a + b);
      total += gk::integrate_toward(f, a, mid, [&](double d) { return tail(a, d); }, base);
      total += gk::integrate_toward(f, b, mid, [&](double d) { return tail(b, d); }, base);
    } else if (sa) {
      total += gk::integrate_toward(f, a, b, [&](double d) { return tail(a, d); }, base);
    } else if (sb) {
      total += gk::integrate_toward(f, b, a, [&](double d) { return tail(b, d); }, base);
    } else {
      total += gk::integrate(f, a, b, base.rel_tol, 0.0, base.budget, 2000);
    }
  }
  return total;
}

/// Integral of y^{-2 gamma} / (y^alpha + 1) over [c, d], 0 <= c < d.
gk::Result scaled_tool_integral(double alpha, double gamma, double c, double d, double tol, gk::Budget& budget) {
  auto f = [&](double y) { return std::pow(y, -2.0 * gamma) / (std::pow(y, alpha) + 1.0); };
  const double e = 1.0 - 2.0 * gamma;
  if (c == 0.0) {
    auto tail = [&](double delta) { return std::pow(delta, e) / e; };
    return gk::integrate_toward(f, 0.0, d, tail, {.rel_tol = tol, .budget = &budget});
  }
  gk::Result total;
  for (double a = c; a < d; a *= 2.0) {
    total += gk::integrate(f, a, std::min(d, 2.0 * a), tol, 0.0, &budget);
  }
  return total;
}

/// Tool symbol -|x - r|^alpha (or -k^{2m}) via y = |x - r| q^{-1/alpha}.
gk::Result tool_route(double alpha, double root, const TestFunction& g, double q, double tol, gk::Budget& budget) {
  double gamma = 0.0;
  std::vector<std::pair<double, double>> pieces;  // ranges of |x - r|
  if (const auto* pw = g.as<PowerIndicator>()) {
    gamma = pw->gamma;
    pieces.emplace_back(0.0, pw->eps);
  } else {
    const auto& b = std::get<IndicatorBox>(g.kind());
    const double lo = b.lo[0] - root;
    const double hi = b.hi[0] - root;
    if (lo >= 0.0) {
      pieces.emplace_back(lo, hi);
    } else if (hi <= 0.0) {
      pieces.emplace_back(-hi, -lo);
    } else {
      pieces.emplace_back(0.0, -lo);
      pieces.emplace_back(0.0, hi);
    }
  }
  const double scale = std::pow(q, -1.0 / alpha);
  const double prefactor = std::pow(q, -1.0 + (1.0 - 2.0 * gamma) / alpha);
  gk::Result total;
  for (auto [c, d] : pieces) {
    auto r = scaled_tool_integral(alpha, gamma, c * scale, d * scale, tol, budget);
    r.value *= prefactor;
    r.abs_error *= prefactor;
    total += r;
  }
  return total;
}

double integral_of_g_squared(const TestFunction& g, double root, double a, double b) {
  if (a > b) std::swap(a, b);
  if (const auto* pw = g.as<PowerIndicator>()) {
    const double e = 1.0 - 2.0 * pw->gamma;
    const double lo = std::clamp(a - root, 0.0, pw->eps);
    const double hi = std::clamp(b - root, 0.0, pw->eps);
    return (std::pow(hi, e) - std::pow(lo, e)) / e;
  }
  return b - a;
}

gk::Result generic_1d(const VarianceQuery& vq, double q, double tol, gk::Budget& budget) {
  const auto& s = vq.symbol;
  const auto& g = vq.g;
  const double root = s.root()[0];
  const Box support = g.bounding_box(s.root());
  auto f = [&](double x) {
    const double gx = g.eval(std::span<const double>(&x, 1), s.root());
    if (gx == 0.0) return 0.0;
    return gx * gx / (-s.eval_unchecked(&x) + q);
  };
  std::vector<double> singular = s.zeros_1d();
  singular.insert(singular.end(), vq.extra_singular_points.begin(), vq.extra_singular_points.end());
  if (g.as<PowerIndicator>()) singular.push_back(root);
  auto tail = [&](double anchor, double delta) {
    return integral_of_g_squared(g, root, anchor - delta, anchor + delta) / q;
  };
  return integrate_segments(f, support.lo[0], support.hi[0], singular, tail,
                            {.rel_tol = tol, .budget = &budget});
}

gk::Result polar_route(const VarianceQuery& vq, const std::function<double(double)>& profile, double q,
                       double tol, gk::Budget& budget) {
  const auto& ball = *vq.g.as<IndicatorBall>();
  const double angle = ball.quadrant ? 0.5 * std::numbers::pi : 2.0 * std::numbers::pi;
  auto f = [&](double r) { return r / (-profile(r) + q); };
  std::vector<double> singular{0.0};
  if (const auto* fs = vq.symbol.as<FrequencySymbol>(); fs && fs->kind == FrequencyKind::SwiftHohenberg2D) {
    singular.push_back(1.0);
  }
  auto tail = [&](double anchor, double delta) { return (std::abs(anchor) + delta) * 2.0 * delta / q; };
  auto r = integrate_segments(f, 0.0, ball.radius, singular, tail, {.rel_tol = tol, .budget = &budget});
  r.value *= angle;
  r.abs_error *= angle;
  return r;
}

bool monotone_toward_root(const SymbolSpec& s) {
  if (s.as<Zero>() || s.as<Radial2D>()) return true;
  if (const auto* poly = s.as<Polynomial>()) {
    for (const auto& [j, a] : poly->coeffs) {
      if (!(a > 0.0)) return false;
      for (int n = 0; n < j.dim(); ++n) {
        if (j[n] % 2 != 0 && s.domain().lo[n] < s.root()[n]) return false;
      }
    }
    return true;
  }
  return false;
}

/// Single positive monomial with a box probe: sum of orthant pieces, each an
/// exact monomial_box_integral. Returns nullopt when the shape does not fit.
std::optional<gk::Result> monomial_route(const VarianceQuery& vq, double q, const QuadratureOptions& opt,
                                         std::size_t& evaluations) {
  const auto* poly = vq.symbol.as<Polynomial>();
  const auto* box = vq.g.as<IndicatorBox>();
  if (!poly || !box || poly->coeffs.size() != 1) return std::nullopt;
  const auto& [j, a] = *poly->coeffs.begin();
  if (!(a > 0.0)) return std::nullopt;
  const int dim = j.dim();
  const auto& root = vq.symbol.root();
  // Per axis: list of (width, negative side) pieces with the root at one end.
  std::vector<std::vector<double>> widths(dim);
  for (int n = 0; n < dim; ++n) {
    const double lo = box->lo[n] - root[n];
    const double hi = box->hi[n] - root[n];
    if (lo < 0.0 && hi > 0.0) {
      if (j[n] % 2 != 0) return std::nullopt;
      widths[n] = {-lo, hi};
    } else if (lo == 0.0) {
      widths[n] = {hi};
    } else if (hi == 0.0 && j[n] % 2 == 0) {
      widths[n] = {-lo};
    } else {
      return std::nullopt;
    }
  }
  gk::Result total;
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> w(dim);
  for (;;) {
    for (int n = 0; n < dim; ++n) w[n] = widths[n][idx[n]];
    auto r = monomial_box_integral(j, w, q / a, opt);
    evaluations += r.evaluations;
    total += gk::Result{r.value / a, r.abs_error / a, r.converged};
    int n = 0;
    while (n < dim && ++idx[n] == widths[n].size()) idx[n++] = 0;
    if (n == dim) break;
  }
  return total;
}

/// Iterated adaptive integration over a box or disc in 2D/3D.
class NestedIntegrator {
 public:
  NestedIntegrator(const VarianceQuery& vq, double q, double tol, gk::Budget& budget)
      : vq_(vq), q_(q), tol_(tol), budget_(budget), dim_(vq.symbol.dim()) {
    support_ = vq.g.bounding_box(vq.symbol.root());
    monotone_ = monotone_toward_root(vq.symbol);
    const auto* fs = vq.symbol.as<FrequencySymbol>();
    ring_ = fs && fs->kind == FrequencyKind::SwiftHohenberg2D;
  }

  gk::Result run() {
    double x[3] = {0.0, 0.0, 0.0};
    ok_ = true;
    auto r = axis(0, x);
    r.converged = r.converged && ok_;
    return r;
  }

 private:
  std::pair<double, double> limits(int n, const double* x) const {
    if (const auto* ball = vq_.g.as<IndicatorBall>(); ball && n == 1) {
      const double dx = x[0] - ball->centre[0];
      const double h = std::sqrt(std::max(0.0, ball->radius * ball->radius - dx * dx));
      return {ball->quadrant ? ball->centre[1] : ball->centre[1] - h, ball->centre[1] + h};
    }
    return {support_.lo[n], support_.hi[n]};
  }

  std::vector<double> singular(int n, const double* x) const {
    if (ring_) {
      if (n == 0) return {-1.0, 1.0};
      if (std::abs(x[0]) < 1.0) {
        const double h = std::sqrt(1.0 - x[0] * x[0]);
        return {-h, h};
      }
      return {};
    }
    if (vq_.symbol.as<Zero>()) return {};
    return {vq_.symbol.root()[n]};
  }

  double inner_volume(int n) const {
    double v = 1.0;
    for (int k = n + 1; k < dim_; ++k) v *= support_.hi[k] - support_.lo[k];
    return v;
  }

  gk::Result axis(int n, double* x) {
    const auto [lo, hi] = limits(n, x);
    if (!(hi > lo)) return {};
    const double sup = inner_volume(n) / q_;
    const double level_tol = n + 1 == dim_ ? 0.5 * tol_ : 0.5 * tol_;
    auto f = [&, n](double t) -> double {
      x[n] = t;
      if (n + 1 == dim_) {
        return 1.0 / (-vq_.symbol.eval_unchecked(x) + q_);
      }
      auto r = axis(n + 1, x);
      ok_ = ok_ && r.converged;
      x[n] = t;
      return r.value;
    };
    auto tail = [sup](double, double delta) { return 2.0 * delta * sup; };
    return integrate_segments(f, lo, hi, singular(n, x), tail,
                              {.rel_tol = level_tol, .monotone = monotone_, .sup_bound = sup,
                               .budget = &budget_});
  }

  const VarianceQuery& vq_;
  double q_;
  double tol_;
  gk::Budget& budget_;
  int dim_;
  Box support_;
  bool monotone_ = false;
  bool ring_ = false;
  bool ok_ = true;
};

void validate(const VarianceQuery& vq) {
  if (!(vq.p < 0.0)) throw ArgumentError("variance_quadrature: p must be negative");
  if (!(vq.sigma > 0.0)) throw ArgumentError("variance_quadrature: sigma must be positive");
  if (vq.symbol.dim() != vq.g.dim()) throw ArgumentError("variance_quadrature: symbol/probe dimension mismatch");
  if (vq.symbol.dim() > 3) throw ArgumentError("variance_quadrature: dimension above 3 is not supported");
  if (const auto* pw = vq.g.as<PowerIndicator>(); pw && !(2.0 * pw->gamma < 1.0)) {
    throw ArgumentError("variance_quadrature: 2*gamma >= 1 is not integrable");
  }
}

}  // namespace

QuadratureResult integrate_variance(const VarianceQuery& vq, const QuadratureOptions& opt) {
  validate(vq);
  const double q = -vq.p;
  const double half_sigma2 = 0.5 * vq.sigma * vq.sigma;
  const auto& s = vq.symbol;
  gk::Budget budget(opt.max_evaluations);
  std::size_t extra_evals = 0;
  gk::Result r;

  if (s.dim() == 1) {
    std::optional<double> alpha;
    if (const auto* t = s.as<ToolAlpha>()) alpha = t->alpha;
    if (const auto* fs = s.as<FrequencySymbol>(); fs && fs->kind == FrequencyKind::Power2m) alpha = 2.0 * fs->m;
    if (alpha && !opt.force_generic && vq.extra_singular_points.empty()) {
      r = tool_route(*alpha, s.root()[0], vq.g, q, opt.rel_tol_1d, budget);
    } else {
      r = generic_1d(vq, q, opt.rel_tol_1d, budget);
    }
  } else {
    const auto* ball = vq.g.as<IndicatorBall>();
    auto profile = s.radial_profile();
    std::optional<gk::Result> fast;
    if (!opt.force_generic) {
      if (ball && profile && near(ball->centre[0], s.root()[0]) && near(ball->centre[1], s.root()[1])) {
        fast = polar_route(vq, *profile, q, opt.rel_tol_nd, budget);
      } else if (ball && profile && s.as<FrequencySymbol>() && near(ball->centre[0], 0.0) &&
                 near(ball->centre[1], 0.0)) {
        fast = polar_route(vq, *profile, q, opt.rel_tol_nd, budget);
      } else {
        fast = monomial_route(vq, q, opt, extra_evals);
      }
    }
    if (fast) {
      r = *fast;
    } else {
      if (s.dim() == 3 && ball) throw ArgumentError("variance_quadrature: disc probes are two-dimensional");
      NestedIntegrator nested(vq, q, opt.rel_tol_nd, budget);
      r = nested.run();
    }
  }
  QuadratureResult out;
  out.value = half_sigma2 * r.value;
  out.abs_error = half_sigma2 * r.abs_error;
  out.evaluations = budget.used() + extra_evals;
  out.converged = r.converged;
  return out;
}

double variance_quadrature(const VarianceQuery& q, const QuadratureOptions& opt) {
  auto r = integrate_variance(q, opt);
  if (!r.converged) {
    std::ostringstream os;
    os << "variance_quadrature: tolerance not met after " << r.evaluations << " evaluations (symbol "
       << q.symbol.describe() << ", p = " << q.p << ")";
    throw NumericalFailure(os.str());
  }
  return r.value;
}

}  // namespace ews
