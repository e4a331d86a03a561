#pragma once

// Catalog of scaling laws C (-p)^s (-log(-p))^k and their empirical
// extraction from parameter sweeps.

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ews/quadrature.hpp"
#include "ews/symbols.hpp"

namespace ews {

struct ScalingLaw {
  double s = 0.0;
  int k = 0;
  bool convergent = false;

  static ScalingLaw bounded() { return {0.0, 0, true}; }
  /// "s=-0.5 k=0" or "convergent".
  std::string describe() const;
  bool operator==(const ScalingLaw&) const = default;
};

/// Exponents of the one-dimensional tool symbol -|x|^alpha probed with
/// g = x^{-gamma} 1_[0,eps]; gamma = 0 is the plain indicator.
ScalingLaw law_1d(double alpha, double gamma = 0.0);

/// Law of -sum_n a_n x^n: governed by the least index with a_n != 0.
ScalingLaw law_analytic_1d(const std::map<int, double>& coeffs);

/// Upper-bound law of int_[0,eps]^N 1/(x^j - p) for N in {2,3}, all
/// components >= 1. Invariant under permutations of j.
ScalingLaw law_upper_bound(const MultiIndex& j);

/// Tightest upper bound over the minimal support. Coefficients are taken
/// positive, so two unit indices make the variance bounded.
ScalingLaw best_upper_bound(const std::set<MultiIndex>& cplus, double eps);
/// Same, from a coefficient map (the convergence test uses the actual signs).
ScalingLaw best_upper_bound(const CoeffMap& coeffs, double eps);

/// Row labels used by the `laws` command, e.g. "Table 1, α>1".
std::string catalog_row_1d(double alpha, double gamma = 0.0);
std::string catalog_row_nd(const MultiIndex& j);

// ------------------------------------------------------------------ sweeps

enum class SweepSource { Quadrature, Simulation };

struct SweepPoint {
  double p = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

/// Samples ordered with p increasing toward 0-.
struct SweepResult {
  std::vector<SweepPoint> points;
  SweepSource source = SweepSource::Quadrature;
};

/// `points` values of p = -10^e, e evenly spaced from hi_decade down to
/// lo_decade (so p increases toward 0-). Requires lo_decade < hi_decade.
std::vector<double> log_spaced_p(double lo_decade, double hi_decade, int points);

/// Quadrature over a p grid, evaluated in parallel.
SweepResult sweep_quadrature(const VarianceQuery& base, const std::vector<double>& ps,
                             const QuadratureOptions& opt = {}, int threads = 1);

/// monomial_integral(j, eps, -p) over a p grid.
SweepResult sweep_monomial(const MultiIndex& j, double eps, const std::vector<double>& ps,
                           const QuadratureOptions& opt = {}, int threads = 1);

void write_sweep_csv(std::ostream& os, const SweepResult& sweep);
/// Throws ParseError naming the offending row, ArgumentError for p >= 0 or
/// non-positive values.
SweepResult read_sweep_csv(std::istream& is);

std::string to_string(SweepSource s);

// ------------------------------------------------------------------ fitting

struct FitWindow {
  double p_lo = 0.0;
  double p_hi = 0.0;
};

/// The smallest two decades of -p present in the sweep.
FitWindow default_window(const SweepResult& sweep, double decades = 2.0);

struct FitResult {
  double s_hat = 0.0;
  double k_hat = 0.0;
  double c_hat = 0.0;
  double residual = 0.0;
  double s_stderr = 0.0;
  std::size_t points = 0;
};

/// Least squares log V = c + s log(-p) + k log(-log(-p)) over window points.
/// With `fixed_k`, k is held at that value and only (c, s) are fitted.
/// Requires >= 8 points with p < 0 inside the window, and p > -1 unless k is
/// held at zero.
FitResult fit_loglog(const SweepResult& sweep, FitWindow window, std::optional<double> fixed_k = std::nullopt);

/// {0} u {-1 + 1/n : n = 2..max_n} u extras.
std::vector<double> default_candidates(const std::vector<double>& extras = {}, int max_n = 20);

struct Classification {
  std::optional<ScalingLaw> law;  // empty: unclassified
  double s_hat = 0.0;
  double k_hat = 0.0;
  std::string describe() const;
};

/// Snap to the nearest candidate exponent within `tol` and k to the nearest
/// integer in [0, 3].
Classification classify(double s_hat, double k_hat, const std::vector<double>& candidates = default_candidates(),
                        double tol = 0.05);

/// Relative change of the value across the final decade of -p.
double final_decade_change(const SweepResult& sweep);

/// One-line summary `s_hat,k_hat,c_hat,residual,classified_s,classified_k`.
std::string fit_summary_line(const FitResult& fit, const Classification& c);
inline constexpr const char* kFitSummaryHeader = "s_hat,k_hat,c_hat,residual,classified_s,classified_k";

}  // namespace ews
