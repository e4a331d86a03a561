#pragma once

// Deterministic evaluation of the stationary variance
//   <V_inf g, g> = (sigma^2 / 2) * int g(x)^2 / (-f(x) - p) dx
// and of the monomial upper-bound integrals for polynomial drifts.

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ews/symbols.hpp"

namespace ews {

struct IndicatorBox {
  Coord lo;
  Coord hi;
};

/// g(x) = (x - root)^{-gamma} on [root, root + eps]; one-dimensional.
struct PowerIndicator {
  double gamma = 0.0;
  double eps = 1.0;
};

/// Indicator of a disc of given radius centred at `centre` (2D). With
/// `quadrant` set, only the part with both coordinates >= centre.
struct IndicatorBall {
  double radius = 1.0;
  Coord centre{0.0, 0.0};
  bool quadrant = false;
};

/// Probe function g with bounded support.
class TestFunction {
 public:
  using Kind = std::variant<IndicatorBox, PowerIndicator, IndicatorBall>;

  static TestFunction box(Coord lo, Coord hi);
  /// [lo, hi]^dim.
  static TestFunction cube(int dim, double lo, double hi);
  static TestFunction power(double gamma, double eps);
  static TestFunction ball(double radius, Coord centre = {0.0, 0.0}, bool quadrant = false);

  int dim() const { return dim_; }
  const Kind& kind() const { return kind_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&kind_);
  }

  /// g(x), where `root` is the reference point of power-type probes.
  double eval(std::span<const double> x, std::span<const double> root) const;
  /// Bounding box of the support.
  Box bounding_box(std::span<const double> root) const;

  std::string describe() const;

 private:
  TestFunction() = default;
  Kind kind_;
  int dim_ = 1;
};

void to_json(nlohmann::json& j, const TestFunction& g);
TestFunction test_function_from_json(const nlohmann::json& j);

struct VarianceQuery {
  SymbolSpec symbol;
  TestFunction g;
  double p = -1.0;
  double sigma = 1.0;
  /// Additional near-singular abscissae (1D), e.g. zeros found numerically.
  std::vector<double> extra_singular_points = {};
};

struct QuadratureOptions {
  double rel_tol_1d = 1e-8;
  double rel_tol_nd = 1e-6;
  std::size_t max_evaluations = std::size_t{1} << 24;
  /// Disable closed-form shortcuts (tool substitution, polar reduction,
  /// single-monomial fast path) and use the generic tensor route.
  bool force_generic = false;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

/// Full result of the variance integral; never throws on budget exhaustion.
QuadratureResult integrate_variance(const VarianceQuery& q, const QuadratureOptions& opt = {});

/// (sigma^2/2) int g^2 / (-f - p). Throws ArgumentError for p >= 0 or
/// non-integrable probes, NumericalFailure when the tolerance is not met.
double variance_quadrature(const VarianceQuery& q, const QuadratureOptions& opt = {});

/// int_{[0,eps]^N} 1 / (x^j + q) dx for q > 0 (coefficient normalised to 1).
double monomial_integral(const MultiIndex& j, double eps, double q,
                         const QuadratureOptions& opt = {});

/// Same integral over the box prod_n [0, widths_n].
QuadratureResult monomial_box_integral(const MultiIndex& j, std::span<const double> widths, double q,
                                       const QuadratureOptions& opt = {});

/// Strip zero components: monomial_integral(j) = factor * monomial_integral(reduced).
/// Throws NoBifurcation when every component is zero.
std::pair<MultiIndex, double> dimension_reduce(const MultiIndex& j, double eps);

/// int_0^{1/q} z log^m(z) / (z + 1)^2 dz.
double appendix_c_integral(int m, double q);

/// int_0^Y dy / (1 + y^i) for integer i >= 1 and Y >= 0.
double resolvent_primitive(int i, double y);

}  // namespace ews
