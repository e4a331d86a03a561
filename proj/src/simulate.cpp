#include "ews/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ews/errors.hpp"
#include "ews/parallel.hpp"

namespace ews {

std::size_t Mesh::size() const {
  std::size_t n = 1;
  for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(N);
  return n;
}

Coord Mesh::point(std::size_t index) const {
  Coord x(dim);
  for (int d = 0; d < dim; ++d) {
    x[d] = coord(static_cast<int>(index % N));
    index /= N;
  }
  return x;
}

void Mesh::validate() const {
  if (!(L > 0.0)) throw ConfigError("mesh: L must be positive");
  if (N < 1) throw ConfigError("mesh: N must be positive");
  if (dim != 1 && dim != 2) throw ConfigError("mesh: simulation supports dim 1 or 2");
}

std::vector<double> step(std::span<const double> u, std::span<const double> drift, double dt,
                         std::span<const double> increment, double sigma) {
  if (u.size() != drift.size() || u.size() != increment.size()) throw ArgumentError("step: size mismatch");
  std::vector<double> out(u.size());
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double denom = 1.0 - drift[n] * dt;
    if (!(denom > 0.0)) throw ConfigError("step: 1 - (f + p) dt must be positive");
    out[n] = (u[n] + sigma * increment[n]) / denom;
  }
  return out;
}

double project(std::span<const double> u, const TestFunction& g, const Mesh& mesh, bool weighted) {
  if (u.size() != mesh.size()) throw ArgumentError("project: state size does not match mesh");
  if (g.dim() != mesh.dim) throw ArgumentError("project: test function dimension does not match mesh");
  const Coord origin(mesh.dim, 0.0);
  double acc = 0.0;
  bool hit = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = g.eval(mesh.point(i), origin);
    if (w == 0.0) continue;
    hit = true;
    acc += w * u[i];
  }
  if (!hit) throw ArgumentError("project: support of g contains no mesh point");
  return weighted ? acc * std::pow(mesh.h(), mesh.dim) : acc;
}

double discrete_ar1_variance(double lambda, double weight, double sigma, double dt) {
  if (!(lambda < 0.0)) throw ArgumentError("discrete_ar1_variance: lambda must be negative");
  return weight * weight * sigma * sigma / (2.0 * -lambda + lambda * lambda * dt);
}

SupportView support_view(const SimConfig& config) {
  config.mesh.validate();
  if (config.symbol.dim() != config.mesh.dim || config.g.dim() != config.mesh.dim) {
    throw ConfigError("simulate: symbol, test function and mesh dimensions differ");
  }
  SupportView v;
  const double cell = config.weighted ? std::pow(config.mesh.h(), config.mesh.dim) : 1.0;
  for (std::size_t i = 0; i < config.mesh.size(); ++i) {
    const Coord x = config.mesh.point(i);
    const double gx = config.g.eval(x, config.symbol.root());
    if (gx == 0.0) continue;
    const double lambda = config.symbol.eval(x) + config.p;
    if (!(lambda < 0.0)) throw ConfigError("simulate: f + p must be negative on the support of g");
    v.index.push_back(i);
    v.weight.push_back(cell * gx);
    v.drift.push_back(lambda);
  }
  if (v.index.empty()) throw ArgumentError("simulate: support of g contains no mesh point");
  return v;
}

long default_burn_in(const SimConfig& config) {
  const auto v = support_view(config);
  const double slowest = *std::max_element(v.drift.begin(), v.drift.end());
  return static_cast<long>(std::ceil(std::log(1e4) / (2.0 * -slowest * config.dt)));
}

namespace {

/// Noise amplitude per point: cylindrical noise on cells of volume h^dim.
double noise_scale(const SimConfig& c) {
  return c.weighted ? std::pow(c.mesh.h(), -0.5 * c.mesh.dim) : 1.0;
}

void validate(const SimConfig& c) {
  if (!(c.p < 0.0)) throw ConfigError("simulate: p must be negative");
  if (!(c.sigma >= 0.0)) throw ConfigError("simulate: sigma must be non-negative");
  if (!(c.dt > 0.0)) throw ConfigError("simulate: dt must be positive");
  if (c.nt < 1) throw ConfigError("simulate: nt must be positive");
  if (c.replicas < 1) throw ConfigError("simulate: replicas must be positive");
  if (c.batches < 2) throw ConfigError("simulate: at least two batches");
  if (c.thin < 1) throw ConfigError("simulate: thin must be positive");
  if (c.noise && c.noise->size() != c.mesh.size()) throw ConfigError("simulate: noise model size differs from mesh");
}

}  // namespace

NoiseModel support_noise(const SimConfig& config, int m, std::uint64_t seed) {
  const auto v = support_view(config);
  if (m <= 0) m = static_cast<int>(v.index.size());
  return NoiseModel::rank_m(config.mesh.size(), v.index, m, seed);
}

double predict_discrete_variance(const SimConfig& config) {
  validate(config);
  const auto v = support_view(config);
  const double c = noise_scale(config);
  if (!config.noise) {
    double total = 0.0;
    for (std::size_t i = 0; i < v.index.size(); ++i) {
      total += discrete_ar1_variance(v.drift[i], v.weight[i] * c, config.sigma, config.dt);
    }
    return total;
  }
  // C_nn' = a_n a_n' sigma^2 c^2 dt S_nn' / (1 - a_n a_n'), S = B diag(q) B^T.
  const auto& b = config.noise->basis();
  const auto& q = config.noise->eigenvalues();
  const std::size_t n = v.index.size();
  Eigen::MatrixXd bs(n, b.cols());
  for (std::size_t i = 0; i < n; ++i) {
    bs.row(static_cast<Eigen::Index>(i)) = b.row(static_cast<Eigen::Index>(v.index[i]));
  }
  for (Eigen::Index m = 0; m < bs.cols(); ++m) bs.col(m) *= std::sqrt(q[m]);
  const Eigen::MatrixXd s = bs * bs.transpose();
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = 1.0 / (1.0 - v.drift[i] * config.dt);
  const double scale = config.sigma * config.sigma * c * c * config.dt;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aa = a[i] * a[k];
      total += v.weight[i] * v.weight[k] * aa * scale * s(i, k) / (1.0 - aa);
    }
  }
  return total;
}

namespace {

struct ReplicaResult {
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  double effective_samples = 0.0;
};

ReplicaResult run_replica(const SimConfig& c, const SupportView& v, long burn_in, int replica) {
  // Points off the support of g evolve independently of it (diagonal drift,
  // noise basis zero there) and never enter the projection: only the
  // support is integrated.
  const std::size_t n = v.index.size();
  std::vector<double> u(n, 0.0);
  if (!c.u0.empty()) {
    if (c.u0.size() != n) throw ConfigError("simulate: u0 must have one value per support point");
    u = c.u0;
  }
  std::vector<double> inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = 1.0 - v.drift[i] * c.dt;
    if (!(denom > 0.0)) throw ConfigError("step: 1 - (f + p) dt must be positive");
    inv[i] = 1.0 / denom;
  }
  const double amp = c.sigma * noise_scale(c);
  Rng rng = make_stream(c.seed, static_cast<std::uint64_t>(replica) + 1);
  std::normal_distribution<double> n01;
  const double sqdt = std::sqrt(c.dt);

  Eigen::MatrixXd local;  // sqrt(q)-scaled basis rows on the support
  Eigen::VectorXd xi, dw;
  if (c.noise) {
    const auto& b = c.noise->basis();
    local.resize(static_cast<Eigen::Index>(n), b.cols());
    for (std::size_t i = 0; i < n; ++i) local.row(static_cast<Eigen::Index>(i)) = b.row(static_cast<Eigen::Index>(v.index[i]));
    for (Eigen::Index m = 0; m < local.cols(); ++m) local.col(m) *= std::sqrt(c.noise->eigenvalues()[m]);
    xi.resize(local.cols());
  }

  std::ofstream ts;
  if (replica == 0 && !c.timeseries_path.empty()) {
    ts.open(c.timeseries_path);
    if (!ts) throw ConfigError("simulate: cannot open " + c.timeseries_path);
    ts << "step,proj\n";
    ts.precision(17);
  }

  const long recorded = c.nt - burn_in;
  std::vector<double> series;
  series.reserve(static_cast<std::size_t>(recorded));
  for (long t = 1; t <= c.nt; ++t) {
    if (c.noise) {
      for (Eigen::Index m = 0; m < xi.size(); ++m) xi(m) = n01(rng);
      dw.noalias() = local * xi;
      for (std::size_t i = 0; i < n; ++i) u[i] = (u[i] + amp * sqdt * dw(static_cast<Eigen::Index>(i))) * inv[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) u[i] = (u[i] + amp * sqdt * n01(rng)) * inv[i];
    }
    if (t <= burn_in) continue;
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += v.weight[i] * u[i];
    series.push_back(proj);
    if (ts.is_open() && (t % c.thin) == 0) ts << t << ',' << proj << '\n';
  }

  // The stationary law is centred (linear drift, zero-mean noise), so the
  // variance is taken about the exact mean 0. Centring on the sample mean
  // would bias it low by Var(sample mean), which is large when the window
  // spans only a few correlation times of the slowest mode.
  ReplicaResult r;
  const double count = static_cast<double>(series.size());
  r.mean = std::accumulate(series.begin(), series.end(), 0.0) / count;
  double ss = 0.0;
  for (double y : series) ss += y * y;
  r.variance = ss / count;

  // Batch means for both the variance (via squared values) and the mean.
  const std::size_t nb = static_cast<std::size_t>(c.batches);
  const std::size_t len = series.size() / nb;
  if (len < 2) throw ConfigError("simulate: too few recorded steps for the batch count");
  std::vector<double> bvar(nb), bmean(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    double sv = 0.0, sm = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) {
      sv += series[i] * series[i];
      sm += series[i];
    }
    bvar[b] = sv / static_cast<double>(len);
    bmean[b] = sm / static_cast<double>(len);
  }
  auto spread = [&](const std::vector<double>& x) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double s2 = 0.0;
    for (double y : x) s2 += (y - m) * (y - m);
    return s2 / static_cast<double>(x.size() - 1);
  };
  r.std_error = std::sqrt(spread(bvar) / static_cast<double>(nb));
  const double var_of_mean = spread(bmean) / static_cast<double>(nb);
  r.effective_samples = var_of_mean > 0.0 ? r.variance / var_of_mean : count;
  if (c.sigma == 0.0) {
    r.variance = 0.0;
    r.std_error = 0.0;
  }
  return r;
}

}  // namespace

VarianceEstimate run(const SimConfig& config) {
  validate(config);
  const auto v = support_view(config);
  const long burn_in = config.burn_in.value_or(default_burn_in(config));
  if (burn_in < 0) throw ConfigError("simulate: burn_in must be non-negative");
  if (burn_in >= config.nt) {
    throw ConfigError("simulate: burn_in (" + std::to_string(burn_in) + ") must be below nt (" +
                      std::to_string(config.nt) + ")");
  }
  std::vector<ReplicaResult> results(static_cast<std::size_t>(config.replicas));
  parallel_for(results.size(), config.threads,
               [&](std::size_t r) { results[r] = run_replica(config, v, burn_in, static_cast<int>(r)); });

  VarianceEstimate est;
  est.burn_in = burn_in;
  const double reps = static_cast<double>(results.size());
  double se2 = 0.0;
  for (const auto& r : results) {
    est.mean += r.mean / reps;
    est.variance += r.variance / reps;
    est.effective_samples += r.effective_samples;
    se2 += r.std_error * r.std_error;
    est.replica_variances.push_back(r.variance);
  }
  est.std_error = std::sqrt(se2) / reps;
  if (results.size() > 1 && est.variance > 0.0) {
    double m = 0.0;
    for (const auto& r : results) m += std::log10(r.variance) / reps;
    double s2 = 0.0;
    for (const auto& r : results) s2 += (std::log10(r.variance) - m) * (std::log10(r.variance) - m);
    est.log10_spread = std::sqrt(s2 / (reps - 1.0));
  }
  return est;
}

}  // namespace ews
