#include "ews/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ews/errors.hpp"

namespace ews {

// ---------------------------------------------------------------- MultiIndex

MultiIndex::MultiIndex(std::initializer_list<int> components) : components_(components) {
  for (int c : components_) {
    if (c < 0) throw ArgumentError("multi-index components must be non-negative");
  }
}

MultiIndex::MultiIndex(std::vector<int> components) : components_(std::move(components)) {
  for (int c : components_) {
    if (c < 0) throw ArgumentError("multi-index components must be non-negative");
  }
}

int MultiIndex::total_degree() const {
  int t = 0;
  for (int c : components_) t += c;
  return t;
}

bool MultiIndex::is_zero() const {
  return std::all_of(components_.begin(), components_.end(), [](int c) { return c == 0; });
}

bool MultiIndex::is_unit() const {
  int ones = 0;
  for (int c : components_) {
    if (c == 1) {
      ++ones;
    } else if (c != 0) {
      return false;
    }
  }
  return ones == 1;
}

bool MultiIndex::dominated_by(const MultiIndex& d) const {
  if (d.dim() != dim()) return false;
  for (int n = 0; n < dim(); ++n) {
    if (d.components_[n] > components_[n]) return false;
  }
  return true;
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int n = 0; n < dim(); ++n) {
    if (n) os << ',';
    os << components_[n];
  }
  os << ')';
  return os.str();
}

// ------------------------------------------------------------------ helpers

namespace {

Box cube(const Coord& center, double lo_offset, double hi_offset) {
  Box b;
  for (double c : center) {
    b.lo.push_back(c + lo_offset);
    b.hi.push_back(c + hi_offset);
  }
  return b;
}

double sh_profile(double r2) {
  const double t = 1.0 - r2;
  return -t * t;
}

int frequency_dim(const FrequencySymbol& s) {
  return s.kind == FrequencyKind::SwiftHohenberg2D ? 2 : 1;
}

}  // namespace

double convolution_multiplier(const FrequencySymbol& kernel, double k) {
  const auto n = kernel.samples.size();
  const double centre = 0.5 * static_cast<double>(n - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) - centre) * kernel.spacing;
    acc += kernel.samples[i] * std::cos(k * x);
  }
  return acc * kernel.spacing / std::sqrt(2.0 * std::numbers::pi);
}

// --------------------------------------------------------------- SymbolSpec

SymbolSpec SymbolSpec::tool_alpha(double alpha, double root) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ArgumentError("tool_alpha: alpha must be a positive real");
  }
  SymbolSpec s;
  s.kind_ = ToolAlpha{alpha};
  s.dim_ = 1;
  s.root_ = {root};
  s.domain_ = cube(s.root_, -1.0, 1.0);
  s.validate_sign();
  return s;
}

SymbolSpec SymbolSpec::polynomial(CoeffMap coeffs, Coord root) {
  if (coeffs.empty()) throw ArgumentError("polynomial: coefficient map is empty");
  const int dim = coeffs.begin()->first.dim();
  if (dim < 1 || dim > 3) throw ArgumentError("polynomial: dimension must be 1, 2 or 3");
  for (const auto& [j, a] : coeffs) {
    if (j.dim() != dim) throw ArgumentError("polynomial: multi-indices of mixed length");
    if (j.is_zero()) throw ArgumentError("polynomial: constant term is not allowed (f(root) = 0)");
    if (a == 0.0 || !std::isfinite(a)) {
      throw ArgumentError("polynomial: stored coefficients must be finite and non-zero");
    }
  }
  if (root.empty()) root.assign(dim, 0.0);
  if (static_cast<int>(root.size()) != dim) throw ArgumentError("polynomial: root dimension");
  SymbolSpec s;
  s.kind_ = Polynomial{std::move(coeffs)};
  s.dim_ = dim;
  s.root_ = std::move(root);
  s.domain_ = cube(s.root_, 0.0, 1.0);
  s.validate_sign();
  return s;
}

SymbolSpec SymbolSpec::piecewise(const SymbolSpec& left, const SymbolSpec& right) {
  if (left.dim() != 1 || right.dim() != 1) throw ArgumentError("piecewise: one-dimensional sides only");
  if (left.root()[0] != right.root()[0]) throw ArgumentError("piecewise: sides must share the root");
  SymbolSpec s;
  s.kind_ = Piecewise{std::make_shared<const SymbolSpec>(left), std::make_shared<const SymbolSpec>(right)};
  s.dim_ = 1;
  s.root_ = left.root();
  s.domain_ = Box{{std::min(left.domain().lo[0], s.root_[0])},
                  {std::max(right.domain().hi[0], s.root_[0])}};
  s.validate_sign();
  return s;
}

SymbolSpec SymbolSpec::radial_2d(double exponent, Coord root) {
  if (!(exponent > 0.0)) throw ArgumentError("radial_2d: exponent must be positive");
  if (root.size() != 2) throw ArgumentError("radial_2d: root must have two coordinates");
  SymbolSpec s;
  s.kind_ = Radial2D{exponent};
  s.dim_ = 2;
  s.root_ = std::move(root);
  s.domain_ = cube(s.root_, -1.0, 1.0);
  s.validate_sign();
  return s;
}

SymbolSpec SymbolSpec::zero(int dim) {
  if (dim < 1 || dim > 3) throw ArgumentError("zero: dimension must be 1, 2 or 3");
  SymbolSpec s;
  s.kind_ = Zero{};
  s.dim_ = dim;
  s.root_.assign(dim, 0.0);
  s.domain_ = cube(s.root_, -1.0, 1.0);
  s.sign_violating_ = true;
  return s;
}

SymbolSpec SymbolSpec::frequency(FrequencySymbol symbol) {
  SymbolSpec s;
  s.dim_ = frequency_dim(symbol);
  switch (symbol.kind) {
    case FrequencyKind::Power2m:
      if (symbol.m < 1) throw ArgumentError("power_2m: m must be a positive integer");
      s.root_ = {0.0};
      s.domain_ = Box{{-2.0}, {2.0}};
      break;
    case FrequencyKind::SwiftHohenberg1D:
      s.root_ = {1.0};
      s.domain_ = Box{{-2.0}, {2.0}};
      break;
    case FrequencyKind::SwiftHohenberg2D:
      s.root_ = {1.0, 0.0};
      s.domain_ = Box{{-2.0, -2.0}, {2.0, 2.0}};
      break;
    case FrequencyKind::ConvolutionKernel: {
      if (symbol.samples.empty()) throw ArgumentError("convolution_kernel: no samples");
      if (!(symbol.spacing > 0.0)) throw ArgumentError("convolution_kernel: spacing must be positive");
      const double kmax = std::numbers::pi / symbol.spacing;
      s.domain_ = Box{{-kmax}, {kmax}};
      // Root: where the multiplier is closest to zero on a fine scan, refined
      // by golden-section search on |F|.
      constexpr int scan = 4096;
      double best_k = 0.0;
      double best = std::abs(convolution_multiplier(symbol, 0.0));
      for (int i = 0; i <= scan; ++i) {
        const double k = -kmax + 2.0 * kmax * i / scan;
        const double v = std::abs(convolution_multiplier(symbol, k));
        if (v < best) {
          best = v;
          best_k = k;
        }
      }
      double a = std::max(-kmax, best_k - 2.0 * kmax / scan);
      double b = std::min(kmax, best_k + 2.0 * kmax / scan);
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(best_k)); ++it) {
        const double c = b - phi * (b - a);
        const double d = a + phi * (b - a);
        if (std::abs(convolution_multiplier(symbol, c)) < std::abs(convolution_multiplier(symbol, d))) {
          b = d;
        } else {
          a = c;
        }
      }
      const double refined = 0.5 * (a + b);
      s.root_ = {std::abs(convolution_multiplier(symbol, refined)) <= best ? refined : best_k};
      break;
    }
  }
  s.kind_ = std::move(symbol);
  s.validate_sign();
  return s;
}

SymbolSpec SymbolSpec::custom(std::string name, int dim, std::function<double(std::span<const double>)> fn,
                              Box domain, Coord root, bool sign_violating) {
  if (dim < 1 || dim > 3) throw ArgumentError("custom: dimension must be 1, 2 or 3");
  if (domain.dim() != dim || static_cast<int>(domain.hi.size()) != dim) {
    throw ArgumentError("custom: domain dimension mismatch");
  }
  if (root.empty()) root.assign(dim, 0.0);
  SymbolSpec s;
  s.kind_ = CustomSymbol{std::move(name), std::move(fn)};
  s.dim_ = dim;
  s.root_ = std::move(root);
  s.domain_ = std::move(domain);
  s.sign_violating_ = sign_violating;
  s.validate_sign();
  return s;
}

SymbolSpec SymbolSpec::with_domain(Box domain) const {
  if (domain.dim() != dim_ || static_cast<int>(domain.hi.size()) != dim_) {
    throw ArgumentError("with_domain: dimension mismatch");
  }
  for (int n = 0; n < dim_; ++n) {
    if (!(domain.lo[n] < domain.hi[n])) throw ArgumentError("with_domain: empty box");
  }
  SymbolSpec s = *this;
  s.domain_ = std::move(domain);
  s.validate_sign();
  return s;
}

double SymbolSpec::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw ArgumentError("eval_symbol: point has dimension " + std::to_string(x.size()) +
                        ", symbol has dimension " + std::to_string(dim_));
  }
  return eval_unchecked(x.data());
}

double SymbolSpec::eval_unchecked(const double* x) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ToolAlpha>) {
          return -std::pow(std::abs(x[0] - root_[0]), k.alpha);
        } else if constexpr (std::is_same_v<K, Polynomial>) {
          double acc = 0.0;
          for (const auto& [j, a] : k.coeffs) {
            double term = a;
            for (int n = 0; n < dim_; ++n) {
              const int e = j[n];
              if (e) term *= std::pow(x[n] - root_[n], e);
            }
            acc += term;
          }
          return -acc;
        } else if constexpr (std::is_same_v<K, Piecewise>) {
          return x[0] <= root_[0] ? k.left->eval_unchecked(x) : k.right->eval_unchecked(x);
        } else if constexpr (std::is_same_v<K, Radial2D>) {
          const double r = std::hypot(x[0] - root_[0], x[1] - root_[1]);
          return -std::pow(r, k.exponent);
        } else if constexpr (std::is_same_v<K, Zero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<K, FrequencySymbol>) {
          switch (k.kind) {
            case FrequencyKind::Power2m:
              return -std::pow(x[0], 2 * k.m);
            case FrequencyKind::SwiftHohenberg1D:
              return sh_profile(x[0] * x[0]);
            case FrequencyKind::SwiftHohenberg2D:
              return sh_profile(x[0] * x[0] + x[1] * x[1]);
            case FrequencyKind::ConvolutionKernel:
              return convolution_multiplier(k, x[0]);
          }
          return 0.0;
        } else {
          return k.fn(std::span<const double>(x, static_cast<std::size_t>(dim_)));
        }
      },
      kind_);
}

void SymbolSpec::validate_sign() const {
  if (sign_violating_) return;
  constexpr int per_axis = 101;
  const double at_root = eval_unchecked(root_.data());

  double scale = 1.0;
  double worst = -std::numeric_limits<double>::infinity();
  Coord worst_x(dim_);
  std::vector<int> idx(dim_, 0);
  Coord x(dim_);
  for (;;) {
    for (int n = 0; n < dim_; ++n) {
      x[n] = domain_.lo[n] + (domain_.hi[n] - domain_.lo[n]) * idx[n] / (per_axis - 1);
    }
    const double v = eval_unchecked(x.data());
    if (!std::isfinite(v)) throw ArgumentError("symbol is not finite on its domain: " + describe());
    scale = std::max(scale, std::abs(v));
    if (v > worst) {
      worst = v;
      worst_x = x;
    }
    int n = 0;
    while (n < dim_ && ++idx[n] == per_axis) idx[n++] = 0;
    if (n == dim_) break;
  }
  const double tol = 1e-12 * scale;
  if (std::abs(at_root) > tol) {
    throw ArgumentError("symbol does not vanish at its root: " + describe());
  }
  if (worst > tol) {
    std::ostringstream os;
    os << "symbol is positive on its domain (f = " << worst << " at x = (";
    for (int n = 0; n < dim_; ++n) os << (n ? "," : "") << worst_x[n];
    os << ")): " << describe();
    throw ArgumentError(os.str());
  }
}

std::vector<double> SymbolSpec::zeros_1d() const {
  if (dim_ != 1) return {};
  if (std::holds_alternative<Zero>(kind_)) return {};
  if (const auto* f = as<FrequencySymbol>()) {
    if (f->kind == FrequencyKind::SwiftHohenberg1D) return {-1.0, 1.0};
  }
  return {root_[0]};
}

std::optional<std::function<double(double)>> SymbolSpec::radial_profile() const {
  if (dim_ != 2) return std::nullopt;
  if (const auto* r = as<Radial2D>()) {
    const double e = r->exponent;
    return [e](double rho) { return -std::pow(rho, e); };
  }
  if (const auto* f = as<FrequencySymbol>(); f && f->kind == FrequencyKind::SwiftHohenberg2D) {
    return [](double rho) { return sh_profile(rho * rho); };
  }
  return std::nullopt;
}

std::string SymbolSpec::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ToolAlpha>) {
          os << "-|x|^" << k.alpha;
        } else if constexpr (std::is_same_v<K, Polynomial>) {
          os << "-(";
          bool first = true;
          for (const auto& [j, a] : k.coeffs) {
            os << (first ? "" : " + ") << a << "*x^" << j.to_string();
            first = false;
          }
          os << ")";
        } else if constexpr (std::is_same_v<K, Piecewise>) {
          os << "piecewise[" << k.left->describe() << " | " << k.right->describe() << "]";
        } else if constexpr (std::is_same_v<K, Radial2D>) {
          os << "-|x|^" << k.exponent << " (2D radial)";
        } else if constexpr (std::is_same_v<K, Zero>) {
          os << "0";
        } else if constexpr (std::is_same_v<K, FrequencySymbol>) {
          switch (k.kind) {
            case FrequencyKind::Power2m: os << "-k^" << 2 * k.m; break;
            case FrequencyKind::SwiftHohenberg1D: os << "-(1-k^2)^2"; break;
            case FrequencyKind::SwiftHohenberg2D: os << "-(1-|k|^2)^2"; break;
            case FrequencyKind::ConvolutionKernel:
              os << "Re F[kernel](k) (" << k.samples.size() << " samples)";
              break;
          }
        } else {
          os << k.name;
        }
      },
      kind_);
  return os.str();
}

double eval_symbol(const SymbolSpec& s, std::span<const double> x) { return s.eval(x); }

// ------------------------------------------------------ multi-index algebra

std::set<MultiIndex> minimal_support(const CoeffMap& coeffs) {
  // d <= j with d != j forces deg(d) < deg(j), so scanning by increasing
  // degree only needs to compare against minimal elements already kept.
  std::vector<MultiIndex> order;
  order.reserve(coeffs.size());
  for (const auto& [j, a] : coeffs) {
    if (a != 0.0) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(), [](const MultiIndex& a, const MultiIndex& b) {
    return a.total_degree() < b.total_degree();
  });
  std::vector<MultiIndex> kept;
  for (const auto& j : order) {
    const bool dominated = std::any_of(kept.begin(), kept.end(), [&](const MultiIndex& d) {
      return d != j && j.dominated_by(d);
    });
    if (!dominated) kept.push_back(j);
  }
  return {kept.begin(), kept.end()};
}

bool predicts_convergence(const CoeffMap& coeffs) {
  if (coeffs.empty()) throw ArgumentError("predicts_convergence: empty coefficient map");
  const int dim = coeffs.begin()->first.dim();
  if (dim < 2) throw ArgumentError("predicts_convergence: requires dimension N > 1");
  std::set<int> unit_axes;
  for (const auto& [j, a] : coeffs) {
    if (j.dim() != dim) throw ArgumentError("predicts_convergence: multi-indices of mixed length");
    if (!j.is_unit() || !(a > 0.0)) continue;
    for (int n = 0; n < dim; ++n) {
      if (j[n] == 1) unit_axes.insert(n);
    }
  }
  return unit_axes.size() >= 2;
}

SymbolSpec real_part_symbol(const ComplexSymbol& s) {
  if (!s.fn) throw ArgumentError("real_part_symbol: no evaluation function");
  auto fn = s.fn;
  auto re = [fn](std::span<const double> x) { return fn(x).real(); };

  // Re(f) identically zero on the sampling lattice -> Zero, flagged.
  constexpr int per_axis = 101;
  const int dim = s.dim;
  std::vector<int> idx(dim, 0);
  Coord x(dim);
  bool all_zero = true;
  for (;;) {
    for (int n = 0; n < dim; ++n) {
      x[n] = s.domain.lo[n] + (s.domain.hi[n] - s.domain.lo[n]) * idx[n] / (per_axis - 1);
    }
    if (re(x) != 0.0) {
      all_zero = false;
      break;
    }
    int n = 0;
    while (n < dim && ++idx[n] == per_axis) idx[n++] = 0;
    if (n == dim) break;
  }
  if (all_zero) return SymbolSpec::zero(dim);
  return SymbolSpec::custom("Re(" + s.name + ")", dim, re, s.domain, s.root);
}

// --------------------------------------------------------------------- JSON

namespace {

nlohmann::json box_json(const Box& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

}  // namespace

void to_json(nlohmann::json& j, const SymbolSpec& s) {
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ToolAlpha>) {
          j = {{"kind", "tool_alpha"}, {"alpha", k.alpha}};
        } else if constexpr (std::is_same_v<K, Polynomial>) {
          auto terms = nlohmann::json::array();
          for (const auto& [idx, a] : k.coeffs) terms.push_back({{"index", idx.components()}, {"coeff", a}});
          j = {{"kind", "polynomial"}, {"terms", terms}};
        } else if constexpr (std::is_same_v<K, Piecewise>) {
          j = {{"kind", "piecewise"}, {"left", *k.left}, {"right", *k.right}};
        } else if constexpr (std::is_same_v<K, Radial2D>) {
          j = {{"kind", "radial_2d"}, {"exponent", k.exponent}};
        } else if constexpr (std::is_same_v<K, Zero>) {
          j = {{"kind", "zero"}};
        } else if constexpr (std::is_same_v<K, FrequencySymbol>) {
          switch (k.kind) {
            case FrequencyKind::Power2m: j = {{"kind", "power_2m"}, {"m", k.m}}; break;
            case FrequencyKind::SwiftHohenberg1D: j = {{"kind", "swift_hohenberg_1d"}}; break;
            case FrequencyKind::SwiftHohenberg2D: j = {{"kind", "swift_hohenberg_2d"}}; break;
            case FrequencyKind::ConvolutionKernel:
              j = {{"kind", "convolution_kernel"}, {"samples", k.samples}, {"spacing", k.spacing}};
              break;
          }
        } else {
          throw ArgumentError("custom symbol '" + k.name + "' cannot be serialised");
        }
      },
      s.kind());
  j["dim"] = s.dim();
  if (!s.as<FrequencySymbol>() && !s.as<Zero>() && !s.as<Piecewise>()) j["root"] = s.root();
  j["domain"] = box_json(s.domain());
}

SymbolSpec symbol_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    auto root_or = [&](int dim) {
      return j.contains("root") ? j.at("root").get<Coord>() : Coord(dim, 0.0);
    };
    std::optional<SymbolSpec> s;
    if (kind == "tool_alpha") {
      s = SymbolSpec::tool_alpha(j.at("alpha").get<double>(), root_or(1)[0]);
    } else if (kind == "polynomial") {
      CoeffMap coeffs;
      for (const auto& t : j.at("terms")) {
        coeffs[MultiIndex(t.at("index").get<std::vector<int>>())] = t.at("coeff").get<double>();
      }
      const int dim = coeffs.empty() ? 1 : coeffs.begin()->first.dim();
      s = SymbolSpec::polynomial(std::move(coeffs), root_or(dim));
    } else if (kind == "piecewise") {
      s = SymbolSpec::piecewise(symbol_from_json(j.at("left")), symbol_from_json(j.at("right")));
    } else if (kind == "radial_2d") {
      s = SymbolSpec::radial_2d(j.at("exponent").get<double>(), root_or(2));
    } else if (kind == "zero") {
      s = SymbolSpec::zero(j.value("dim", 1));
    } else if (kind == "power_2m") {
      s = SymbolSpec::frequency({FrequencyKind::Power2m, j.at("m").get<int>(), {}, 1.0});
    } else if (kind == "swift_hohenberg_1d") {
      s = SymbolSpec::frequency({FrequencyKind::SwiftHohenberg1D, 1, {}, 1.0});
    } else if (kind == "swift_hohenberg_2d") {
      s = SymbolSpec::frequency({FrequencyKind::SwiftHohenberg2D, 1, {}, 1.0});
    } else if (kind == "convolution_kernel") {
      s = SymbolSpec::frequency({FrequencyKind::ConvolutionKernel, 1,
                                 j.at("samples").get<std::vector<double>>(), j.at("spacing").get<double>()});
    } else {
      throw ParseError("unknown symbol kind '" + kind + "'");
    }
    if (j.contains("dim") && j.at("dim").get<int>() != s->dim()) {
      throw ParseError("symbol 'dim' does not match its kind");
    }
    if (j.contains("domain")) {
      s = s->with_domain(Box{j.at("domain").at("lo").get<Coord>(), j.at("domain").at("hi").get<Coord>()});
    }
    return *s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("symbol JSON: ") + e.what());
  }
}

}  // namespace ews
