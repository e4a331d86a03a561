#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ews/errors.hpp"
#include "ews/spectral.hpp"

using namespace ews;
using std::numbers::pi;

namespace {

const double kSqrt2 = std::sqrt(2.0);

FrequencySymbol power2m(int m) { return {FrequencyKind::Power2m, m, {}, 1.0}; }
FrequencySymbol sh1d() { return {FrequencyKind::SwiftHohenberg1D, 1, {}, 1.0}; }
FrequencySymbol sh2d() { return {FrequencyKind::SwiftHohenberg2D, 1, {}, 1.0}; }

// Five centred samples with multiplier F(k) = -A (cos kh - c)^2.
FrequencySymbol squared_cosine_kernel(double a, double c, double h) {
  const double s = std::sqrt(2.0 * pi) / h;
  const double b0 = -a * (0.5 + c * c) * s;
  const double b1 = a * c * s;
  const double b2 = -a * s / 4.0;
  return {FrequencyKind::ConvolutionKernel, 1, {b2, b1, b0, b1, b2}, h};
}

double at(const SymbolSpec& s, double k) { return s.eval(std::vector<double>{k}); }

}  // namespace

TEST_CASE("multiplier values") {
  CHECK(at(frequency_symbol(power2m(1)), 2.0) == doctest::Approx(-4.0));
  CHECK(at(frequency_symbol(power2m(2)), 2.0) == doctest::Approx(-16.0));
  CHECK(at(frequency_symbol(sh1d()), 1.0) == 0.0);
  CHECK(at(frequency_symbol(sh1d()), 0.0) == doctest::Approx(-1.0));
  const auto s2 = frequency_symbol(sh2d());
  CHECK(s2.eval(std::vector<double>{0.6, 0.8}) == doctest::Approx(0.0).scale(1.0));
  CHECK(s2.eval(std::vector<double>{0.0, 0.0}) == doctest::Approx(-1.0));
}

TEST_CASE("spectral variance closed forms") {
  FrequencyQuery q{power2m(1), TestFunction::cube(1, 0.0, 1.0), -0.01, kSqrt2};
  CHECK(variance_spectral(q) == doctest::Approx(10.0 * std::atan(10.0)).epsilon(1e-8));
  FrequencyQuery d{sh2d(), TestFunction::ball(kSqrt2), -1.0, kSqrt2};
  CHECK(variance_spectral(d) == doctest::Approx(pi * pi / 2.0).epsilon(1e-6));
}

TEST_CASE("power of k matches the tool symbol") {
  for (int m : {1, 2, 3}) {
    for (double p : {-1.0, -1e-3, -1e-7}) {
      FrequencyQuery q{power2m(m), TestFunction::cube(1, 0.0, 1.0), p, 1.0};
      const double tool = variance_quadrature({SymbolSpec::tool_alpha(2.0 * m), TestFunction::cube(1, 0.0, 1.0), p, 1.0});
      CHECK(variance_spectral(q) == doctest::Approx(tool).epsilon(1e-12));
    }
  }
}

TEST_CASE("radial reduction against the tensor rule") {
  QuadratureOptions tensor;
  tensor.force_generic = true;
  for (double p : {-1.0, -0.1, -0.01}) {
    const double qv = -p;
    const double closed = 2.0 * pi * std::atan(1.0 / std::sqrt(qv)) / std::sqrt(qv) / 2.0;
    FrequencyQuery d{sh2d(), TestFunction::ball(kSqrt2), p, 1.0};
    CAPTURE(p);
    CHECK(variance_spectral(d) == doctest::Approx(closed).epsilon(1e-6));
    CHECK(variance_spectral(d, tensor) == doctest::Approx(closed).epsilon(1e-4));
  }
}

TEST_CASE("swift-hohenberg 1d slope") {
  SweepResult r;
  for (double p : log_spaced_p(-8, -2, 24)) {
    FrequencyQuery q{sh1d(), TestFunction::cube(1, 0.0, 2.0), p, 1.0};
    r.points.push_back({p, variance_spectral(q), 0.0});
  }
  const auto f = fit_loglog(r, default_window(r));
  CHECK(f.s_hat == doctest::Approx(-0.5).epsilon(0.03 / 0.5));
  const auto cls = classify(f.s_hat, f.k_hat);
  REQUIRE(cls.law);
  CHECK(*cls.law == predicted_spectral_law(sh1d()));
}

TEST_CASE("catalog laws") {
  CHECK(predicted_spectral_law(power2m(2)).s == doctest::Approx(-0.75));
  CHECK(predicted_spectral_law(power2m(1)).s == doctest::Approx(-0.5));
  CHECK(predicted_spectral_law(sh1d()) == ScalingLaw{-0.5, 0, false});
  CHECK(predicted_spectral_law(sh2d()) == ScalingLaw{-0.5, 0, false});
  CHECK_THROWS_WITH_AS(predicted_spectral_law(squared_cosine_kernel(1.0, 0.5, 1.0)),
                       doctest::Contains("law requires kernel analysis"), ArgumentError);
}

TEST_CASE("zero set") {
  CHECK(frequency_zeros(power2m(1), -1.0, 1.0) == std::vector<double>{0.0});
  CHECK(frequency_zeros(sh1d(), 0.0, 3.0) == std::vector<double>{1.0});
  FrequencyQuery far{sh1d(), TestFunction::cube(1, 2.0, 3.0), -1e-3, 1.0};
  CHECK_FALSE(touches_zero_set(far));
  const double v1 = variance_spectral(far);
  far.p = -1e-12;
  CHECK(variance_spectral(far) == doctest::Approx(v1).epsilon(1e-3));
  FrequencyQuery near{sh1d(), TestFunction::cube(1, 0.0, 1.0), -1e-3, 1.0};
  CHECK(touches_zero_set(near));
  FrequencyQuery ring{sh2d(), TestFunction::ball(0.5), -1e-3, 1.0};
  CHECK_FALSE(touches_zero_set(ring));
}

TEST_CASE("kernel multiplier table matches the direct sum") {
  const auto k = squared_cosine_kernel(0.7, 0.3, 0.5);
  const auto t = tabulate_multiplier(k, 256);
  REQUIRE(t.k.size() == t.value.size());
  for (std::size_t i = 0; i < t.k.size(); i += 17) {
    CHECK(t.value[i] == doctest::Approx(convolution_multiplier(k, t.k[i])).epsilon(1e-10).scale(1.0));
    const double c = std::cos(t.k[i] * 0.5) - 0.3;
    CHECK(t.value[i] == doctest::Approx(-0.7 * c * c).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("kernel zeros found from samples") {
  const double h = 1.0, c = 0.5;
  const auto k = squared_cosine_kernel(1.0, c, h);
  const auto z = frequency_zeros(k, -3.0, 3.0);
  REQUIRE(z.size() == 2);
  CHECK(z[0] == doctest::Approx(-std::acos(c) / h).epsilon(1e-6));
  CHECK(z[1] == doctest::Approx(std::acos(c) / h).epsilon(1e-6));
  // A double zero behaves like -k^2 locally: slope -1/2.
  SweepResult r;
  for (double p : log_spaced_p(-8, -2, 24)) {
    FrequencyQuery q{k, TestFunction::cube(1, 0.0, 2.0), p, 1.0};
    r.points.push_back({p, variance_spectral(q), 0.0});
  }
  CHECK(fit_loglog(r, default_window(r)).s_hat == doctest::Approx(-0.5).epsilon(0.04));
}

TEST_CASE("kernel csv") {
  std::istringstream good("# spacing=0.25\n1\n-2\n1\n");
  const auto k = read_kernel_csv(good);
  CHECK(k.kind == FrequencyKind::ConvolutionKernel);
  CHECK(k.spacing == 0.25);
  CHECK(k.samples == std::vector<double>{1.0, -2.0, 1.0});
  std::istringstream missing("1\n2\n");
  CHECK_THROWS_AS(read_kernel_csv(missing), ParseError);
  std::istringstream bad("# spacing=1\n1\nxyz\n");
  CHECK_THROWS_WITH_AS(read_kernel_csv(bad), doctest::Contains("row 3"), ParseError);
}
