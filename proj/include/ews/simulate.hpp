#pragma once

// Implicit Euler-Maruyama integration of du = (f + p) u dt + sigma dW on a
// uniform mesh and estimation of the stationary variance of <u, g>.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ews/noise.hpp"
#include "ews/quadrature.hpp"
#include "ews/symbols.hpp"

namespace ews {

/// Interior points r_n = -L + 2 n L / (N + 1), n = 1..N, per axis.
struct Mesh {
  double L = 1.0;
  int N = 99;
  int dim = 1;

  double h() const { return 2.0 * L / (N + 1); }
  /// Coordinate of the i-th interior point on an axis, i = 0..N-1.
  double coord(int i) const { return -L + (i + 1) * h(); }
  std::size_t size() const;
  /// Coordinates of flattened point `index` (axis 0 fastest).
  Coord point(std::size_t index) const;
  void validate() const;
};

struct SimConfig {
  Mesh mesh;
  SymbolSpec symbol = SymbolSpec::tool_alpha(2.0);
  TestFunction g = TestFunction::cube(1, -1.0, 1.0);
  double p = -0.1;
  double sigma = 1.0;
  double dt = 0.01;
  long nt = 100000;
  /// Steps discarded before recording; default from the slowest mode.
  std::optional<long> burn_in;
  /// Rank-M noise; identity Q when empty.
  std::optional<NoiseModel> noise;
  /// Initial state on the support of g; zero when empty.
  std::vector<double> u0;
  std::uint64_t seed = 0;
  int replicas = 1;
  /// Cell-weighted projection h^dim sum g u with noise of intensity h^{-dim}
  /// per point. When false: plain sum and unit-intensity noise.
  bool weighted = true;
  int threads = 1;
  int batches = 32;
  /// Optional `step,proj` CSV for replica 0, every `thin` steps.
  std::string timeseries_path;
  long thin = 1;
};

struct VarianceEstimate {
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  double effective_samples = 0.0;
  /// Sample standard deviation of log10(variance) across replicas.
  double log10_spread = 0.0;
  std::vector<double> replica_variances;
  long burn_in = 0;
};

/// (u + sigma * increment) / (1 - drift * dt), elementwise.
std::vector<double> step(std::span<const double> u, std::span<const double> drift, double dt,
                         std::span<const double> increment, double sigma);

/// h^dim sum g(r_n) u(r_n) over mesh points in the support of g.
double project(std::span<const double> u, const TestFunction& g, const Mesh& mesh, bool weighted = true);

/// Stationary variance sigma^2 w^2 / (2|lambda| + lambda^2 dt) of the
/// single-mode scheme.
double discrete_ar1_variance(double lambda, double weight, double sigma, double dt);

/// Mesh points inside supp g, their weights and drifts f(r) + p.
struct SupportView {
  std::vector<std::size_t> index;
  std::vector<double> weight;
  std::vector<double> drift;
};
SupportView support_view(const SimConfig& config);

/// Burn-in making exp(2 lambda_max burn_in dt) < 1e-4 for the slowest mode.
long default_burn_in(const SimConfig& config);

/// Exact stationary variance of the projected discrete chain.
double predict_discrete_variance(const SimConfig& config);

/// Rank-M noise on the support of g (M = support size when m <= 0).
NoiseModel support_noise(const SimConfig& config, int m, std::uint64_t seed);

VarianceEstimate run(const SimConfig& config);

}  // namespace ews
