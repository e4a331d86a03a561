#pragma once

// Drift symbols f for the multiplication operator T_f and the multi-index
// algebra used to predict upper bounds for polynomial drifts.

#include <complex>
#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ews {

using Coord = std::vector<double>;

/// Exponent vector of a monomial x^j = prod_n x_n^{j_n}.
class MultiIndex {
 public:
  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> components);
  explicit MultiIndex(std::vector<int> components);

  int dim() const { return static_cast<int>(components_.size()); }
  int operator[](int n) const { return components_[n]; }
  const std::vector<int>& components() const { return components_; }

  int total_degree() const;
  bool is_zero() const;
  /// Exactly one component equal to 1, the rest 0.
  bool is_unit() const;
  /// Componentwise d <= *this.
  bool dominated_by(const MultiIndex& d) const;

  std::string to_string() const;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<int> components_;
};

using CoeffMap = std::map<MultiIndex, double>;

/// Axis-aligned box, used as the declared domain of a symbol.
struct Box {
  Coord lo;
  Coord hi;
  int dim() const { return static_cast<int>(lo.size()); }
};

class SymbolSpec;

struct ToolAlpha {
  double alpha = 1.0;
};

struct Polynomial {
  CoeffMap coeffs;
};

/// One-sided symbols meeting at the root: `left` for x <= root, `right` for x > root.
struct Piecewise {
  std::shared_ptr<const SymbolSpec> left;
  std::shared_ptr<const SymbolSpec> right;
};

struct Radial2D {
  double exponent = 2.0;
};

struct Zero {};

enum class FrequencyKind { Power2m, SwiftHohenberg1D, SwiftHohenberg2D, ConvolutionKernel };

/// Fourier multiplier of a translation-invariant operator.
///
/// ConvolutionKernel samples sit at x_n = (n - (size-1)/2) * spacing and the
/// multiplier is the real part of the unitary-convention transform
/// (2 pi)^{-1/2} * spacing * sum_n kernel_n exp(-i k x_n). Other
/// normalisations of the transform change only the prefactor of the variance.
struct FrequencySymbol {
  FrequencyKind kind = FrequencyKind::Power2m;
  int m = 1;
  std::vector<double> samples;
  double spacing = 1.0;
};

/// Arbitrary callable, typically the real part of a complex symbol.
struct CustomSymbol {
  std::string name;
  std::function<double(std::span<const double>)> fn;
};

using SymbolKind =
    std::variant<ToolAlpha, Polynomial, Piecewise, Radial2D, Zero, FrequencySymbol, CustomSymbol>;

/// A drift function f with its dimension, root and declared domain.
///
/// Every symbol except Zero (and symbols explicitly flagged sign-violating)
/// is checked at construction: f(root) == 0 and f <= 0 on a 101^dim lattice
/// over the domain. Immutable once built.
class SymbolSpec {
 public:
  static SymbolSpec tool_alpha(double alpha, double root = 0.0);
  /// Default domain is [root, root + 1]^dim, the positive orthant of the root.
  static SymbolSpec polynomial(CoeffMap coeffs, Coord root = {});
  static SymbolSpec piecewise(const SymbolSpec& left, const SymbolSpec& right);
  static SymbolSpec radial_2d(double exponent, Coord root = {0.0, 0.0});
  static SymbolSpec zero(int dim);
  static SymbolSpec frequency(FrequencySymbol symbol);
  static SymbolSpec custom(std::string name, int dim,
                           std::function<double(std::span<const double>)> fn, Box domain,
                           Coord root = {}, bool sign_violating = false);

  /// Copy with a different declared domain; re-runs the sign check.
  SymbolSpec with_domain(Box domain) const;

  /// f(x). Throws ArgumentError on dimension mismatch.
  double eval(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return eval(x); }
  /// f(x) without the dimension check; `x` must hold dim() values.
  double eval_unchecked(const double* x) const;

  int dim() const { return dim_; }
  const Coord& root() const { return root_; }
  const Box& domain() const { return domain_; }
  const SymbolKind& kind() const { return kind_; }
  bool sign_violating() const { return sign_violating_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&kind_);
  }

  /// Points (per axis, for 1D symbols) where f vanishes: the root plus the
  /// zero set of frequency symbols inside the domain.
  std::vector<double> zeros_1d() const;

  /// Radial profile f(r) about the root, if the symbol is radial in 2D.
  std::optional<std::function<double(double)>> radial_profile() const;

  std::string describe() const;

 private:
  SymbolSpec() = default;
  void validate_sign() const;

  SymbolKind kind_;
  int dim_ = 1;
  Coord root_;
  Box domain_;
  bool sign_violating_ = false;
};

/// f(x) for a symbol; same as SymbolSpec::eval.
double eval_symbol(const SymbolSpec& s, std::span<const double> x);

/// Minimal elements of the support of `coeffs` under the componentwise order.
std::set<MultiIndex> minimal_support(const CoeffMap& coeffs);

/// True when two distinct unit multi-indices carry positive coefficients,
/// which forces a bounded variance as p -> 0-. Requires dim >= 2.
bool predicts_convergence(const CoeffMap& coeffs);

/// Complex-valued drift symbol.
struct ComplexSymbol {
  std::string name;
  int dim = 1;
  std::function<std::complex<double>(std::span<const double>)> fn;
  Box domain;
  Coord root;
};

/// Re(f) as a real symbol. A real part that vanishes on the whole sampling
/// lattice yields the Zero symbol flagged as sign-violating.
SymbolSpec real_part_symbol(const ComplexSymbol& s);

/// Real part of the unitary transform of centred kernel samples at frequency k.
double convolution_multiplier(const FrequencySymbol& kernel, double k);

// JSON: {"kind":"tool_alpha","alpha":2.0,"dim":1} and friends; see README.
void to_json(nlohmann::json& j, const SymbolSpec& s);
SymbolSpec symbol_from_json(const nlohmann::json& j);

}  // namespace ews
