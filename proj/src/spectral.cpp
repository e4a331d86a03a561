#include "ews/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "ews/errors.hpp"

namespace ews {

SymbolSpec frequency_symbol(const FrequencySymbol& kind) { return SymbolSpec::frequency(kind); }

MultiplierTable tabulate_multiplier(const FrequencySymbol& kernel, int padded_size) {
  const int n = static_cast<int>(kernel.samples.size());
  if (n == 0) throw ArgumentError("tabulate_multiplier: no samples");
  const int size = std::max(padded_size, n);
  std::vector<double> in(size, 0.0);
  std::copy(kernel.samples.begin(), kernel.samples.end(), in.begin());
  const int bins = size / 2 + 1;
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins));
  const fftw_plan plan = fftw_plan_dft_r2c_1d(size, in.data(), out, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  // Samples sit at x_n = (n - c) h: sum_n f_n e^{-i k x_n} = e^{i k c h} X_j.
  const double h = kernel.spacing;
  const double c = 0.5 * (n - 1);
  const double norm = h / std::sqrt(2.0 * std::numbers::pi);
  MultiplierTable t;
  t.k.resize(bins);
  t.value.resize(bins);
  for (int j = 0; j < bins; ++j) {
    const double k = 2.0 * std::numbers::pi * j / (size * h);
    const std::complex<double> x(out[j][0], out[j][1]);
    t.k[j] = k;
    t.value[j] = norm * (std::polar(1.0, k * c * h) * x).real();
  }
  fftw_free(out);
  return t;
}

namespace {

double bisect(const FrequencySymbol& kern, double a, double b) {
  double fa = convolution_multiplier(kern, a);
  for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = convolution_multiplier(kern, m);
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double golden_max(const FrequencySymbol& kern, double a, double b) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    if (convolution_multiplier(kern, c) > convolution_multiplier(kern, d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<double> frequency_zeros(const FrequencySymbol& kind, double lo, double hi) {
  std::vector<double> z;
  auto keep = [&](double x) {
    if (x >= lo && x <= hi) z.push_back(x);
  };
  switch (kind.kind) {
    case FrequencyKind::Power2m:
      keep(0.0);
      return z;
    case FrequencyKind::SwiftHohenberg1D:
      keep(-1.0);
      keep(1.0);
      return z;
    case FrequencyKind::SwiftHohenberg2D:
      throw ArgumentError("frequency_zeros: the 2D zero set is the unit circle");
    case FrequencyKind::ConvolutionKernel:
      break;
  }
  const int n = static_cast<int>(kind.samples.size());
  int padded = 1;
  while (padded < 64 * n) padded *= 2;
  const auto t = tabulate_multiplier(kind, padded);
  double scale = 0.0;
  for (double v : t.value) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * std::max(scale, 1e-300);
  const double dk = t.k.size() > 1 ? t.k[1] : 1.0;
  std::vector<double> found;
  for (std::size_t j = 0; j + 1 < t.k.size(); ++j) {
    const double a = t.value[j], b = t.value[j + 1];
    if (a == 0.0) found.push_back(t.k[j]);
    if ((a > 0.0) != (b > 0.0) && a != 0.0 && b != 0.0) found.push_back(bisect(kind, t.k[j], t.k[j + 1]));
  }
  // f <= 0 touching zero: local maxima of the table close to zero.
  for (std::size_t j = 0; j < t.k.size(); ++j) {
    const double left = j > 0 ? t.value[j - 1] : t.value[j + 1];
    const double right = j + 1 < t.k.size() ? t.value[j + 1] : left;
    if (t.value[j] >= left && t.value[j] >= right && std::abs(t.value[j]) < 1e-3 * scale) {
      const double x = golden_max(kind, std::max(0.0, t.k[j] - dk), t.k[j] + dk);
      if (std::abs(convolution_multiplier(kind, x)) <= tol) found.push_back(x);
    }
  }
  // The multiplier is even in k.
  for (double x : found) {
    keep(x);
    if (x != 0.0) keep(-x);
  }
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), z.end());
  return z;
}

bool touches_zero_set(const FrequencyQuery& q) {
  const auto s = frequency_symbol(q.kind);
  const Box box = q.ghat.bounding_box(s.root());
  if (q.kind.kind == FrequencyKind::SwiftHohenberg2D) {
    if (const auto* ball = q.ghat.as<IndicatorBall>()) {
      const double c = std::hypot(ball->centre[0], ball->centre[1]);
      if (ball->quadrant) return c == 0.0 ? ball->radius >= 1.0 : std::abs(c - 1.0) <= ball->radius;
      return std::abs(c - 1.0) <= ball->radius;
    }
    double near2 = 0.0, far2 = 0.0;
    for (int d = 0; d < 2; ++d) {
      const double a = box.lo[d], b = box.hi[d];
      const double nearest = (a <= 0.0 && b >= 0.0) ? 0.0 : std::min(std::abs(a), std::abs(b));
      near2 += nearest * nearest;
      far2 += std::max(a * a, b * b);
    }
    return near2 <= 1.0 && far2 >= 1.0;
  }
  return !frequency_zeros(q.kind, box.lo[0], box.hi[0]).empty();
}

double variance_spectral(const FrequencyQuery& q, const QuadratureOptions& opt) {
  const auto s = frequency_symbol(q.kind);
  if (q.ghat.dim() != s.dim()) throw ArgumentError("variance_spectral: probe dimension does not match symbol");
  const Box box = q.ghat.bounding_box(s.root());
  for (int d = 0; d < box.dim(); ++d) {
    if (!std::isfinite(box.lo[d]) || !std::isfinite(box.hi[d])) {
      throw ArgumentError("variance_spectral: probe support must be bounded");
    }
  }
  VarianceQuery vq{s, q.ghat, q.p, q.sigma};
  if (q.kind.kind == FrequencyKind::ConvolutionKernel) {
    vq.extra_singular_points = frequency_zeros(q.kind, box.lo[0], box.hi[0]);
  }
  return variance_quadrature(vq, opt);
}

ScalingLaw predicted_spectral_law(const FrequencySymbol& kind) {
  switch (kind.kind) {
    case FrequencyKind::Power2m:
      if (kind.m < 1) throw ArgumentError("predicted_spectral_law: m must be >= 1");
      return {-1.0 + 1.0 / (2.0 * kind.m), 0, false};
    case FrequencyKind::SwiftHohenberg1D:
    case FrequencyKind::SwiftHohenberg2D:
      return {-0.5, 0, false};
    case FrequencyKind::ConvolutionKernel:
      break;
  }
  throw ArgumentError(
      "predicted_spectral_law: law requires kernel analysis; sweep the variance and use fit_loglog");
}

FrequencySymbol read_kernel_csv(std::istream& is) {
  FrequencySymbol k;
  k.kind = FrequencyKind::ConvolutionKernel;
  std::optional<double> spacing;
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const auto pos = line.find("spacing");
      if (pos != std::string::npos) {
        const auto eq = line.find_first_of("=:", pos);
        if (eq == std::string::npos) throw ParseError("kernel CSV row " + std::to_string(row) + ": malformed spacing");
        try {
          spacing = std::stod(line.substr(eq + 1));
        } catch (const std::exception&) {
          throw ParseError("kernel CSV row " + std::to_string(row) + ": spacing is not a number");
        }
      }
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw ParseError("kernel CSV row " + std::to_string(row) + ": not a number: '" + line + "'");
    }
    if (line.find_first_not_of(" \t", used) != std::string::npos) {
      throw ParseError("kernel CSV row " + std::to_string(row) + ": expected one value per line");
    }
    k.samples.push_back(v);
  }
  if (!spacing) throw ParseError("kernel CSV: missing '# spacing=<h>' header comment");
  if (!(*spacing > 0.0)) throw ParseError("kernel CSV: spacing must be positive");
  if (k.samples.empty()) throw ParseError("kernel CSV: no samples");
  k.spacing = *spacing;
  return k;
}

}  // namespace ews
