#pragma once

// The `ews` command-line front end. Everything is reachable in-process so
// tests can drive the commands without spawning the binary.

#include <iosfwd>
#include <string>
#include <vector>

#include "ews/quadrature.hpp"
#include "ews/symbols.hpp"

namespace ews {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 2;
inline constexpr int validation = 3;
inline constexpr int numerical = 4;
}  // namespace exit_code

inline constexpr const char* kVersion = "1.0.0";

/// Runs `ews` with the given arguments (argv[0] is the program name) and
/// returns the exit code. Normal output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Symbol grammar: tool:A | poly:J=C;J=C | radial:E | zero:N | power2m:M |
/// sh1d | sh2d | kernel:FILE | @FILE.json. Multi-indices are comma lists.
SymbolSpec parse_symbol_arg(const std::string& text);

/// Frequency-space operators accepted by `spectral`: power2m:M | sh1d | sh2d | kernel:FILE.
FrequencySymbol parse_frequency_arg(const std::string& text);

/// Probe grammar: box:lo,hi[,lo,hi..] | cube:N,lo,hi | power:GAMMA,EPS |
/// ball:R[,cx,cy] | quarter:R[,cx,cy] | @FILE.json.
TestFunction parse_probe_arg(const std::string& text);

}  // namespace ews
