#pragma once

// Fourier-multiplier examples: -k^{2m}, Swift-Hohenberg in 1D/2D and
// convolution kernels, reduced to multiplication symbols in frequency space.

#include <iosfwd>
#include <vector>

#include "ews/quadrature.hpp"
#include "ews/scaling.hpp"
#include "ews/symbols.hpp"

namespace ews {

struct FrequencyQuery {
  FrequencySymbol kind;
  /// Probe on the frequency domain.
  TestFunction ghat = TestFunction::cube(1, 0.0, 1.0);
  double p = -1.0;
  double sigma = 1.0;
};

/// Symbol f(k) of the operator.
SymbolSpec frequency_symbol(const FrequencySymbol& kind);

/// Zeros of f inside [lo, hi] (1D kinds). Convolution kernels: the multiplier
/// is tabulated by FFT of the zero-padded samples; sign changes and
/// near-zero maxima of the grid are refined by bisection / golden section.
std::vector<double> frequency_zeros(const FrequencySymbol& kind, double lo, double hi);

/// Whether the closed support of ghat meets the zero set of f. When it does
/// not, the variance stays bounded as p -> 0-.
bool touches_zero_set(const FrequencyQuery& q);

/// (sigma^2/2) int |ghat|^2 / (-f(k) - p) dk.
double variance_spectral(const FrequencyQuery& q, const QuadratureOptions& opt = {});

/// Catalog law of the operator; ConvolutionKernel throws ArgumentError.
ScalingLaw predicted_spectral_law(const FrequencySymbol& kind);

/// Kernel samples: one value per line, spacing in a header comment
/// `# spacing=<h>`.
FrequencySymbol read_kernel_csv(std::istream& is);

/// Multiplier tabulated on the FFT grid k_j = 2 pi j / (P h), j = 0..P/2.
struct MultiplierTable {
  std::vector<double> k;
  std::vector<double> value;
};
MultiplierTable tabulate_multiplier(const FrequencySymbol& kernel, int padded_size);

}  // namespace ews
