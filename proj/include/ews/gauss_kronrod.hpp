#pragma once

// Adaptive Gauss-Kronrod (G10/K21) integration with geometric panelling
// toward near-singular endpoints.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

namespace ews::gk {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = true;

  Result& operator+=(const Result& o) {
    value += o.value;
    abs_error += o.abs_error;
    converged = converged && o.converged;
    return *this;
  }
};

/// Shared evaluation counter. Once exhausted, integrators stop refining and
/// report `converged = false`.
class Budget {
 public:
  explicit Budget(std::size_t limit = std::size_t{1} << 24) : limit_(limit) {}
  void charge(std::size_t n) { used_ += n; }
  bool exhausted() const { return used_ >= limit_; }
  std::size_t used() const { return used_; }
  std::size_t limit() const { return limit_; }

 private:
  std::size_t limit_;
  std::size_t used_ = 0;
};

namespace detail {

// QUADPACK qk21 abscissae and weights.
inline constexpr std::array<double, 11> xgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> wgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600225329419, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> wg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment rule21(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double resk = fc * wgk[10];
  double resg = 0.0;
  double resabs = std::abs(resk);
  std::array<double, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * xgk[j];
    f1[j] = f(centre - dx);
    f2[j] = f(centre + dx);
    const double s = f1[j] + f2[j];
    resk += wgk[j] * s;
    resabs += wgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += wg[j / 2] * s;
  }
  const double mean = 0.5 * resk;
  double resasc = wgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j) resasc += wgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  resk *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / eps50) err = std::max(eps50 * resabs, err);
  return {a, b, resk, err};
}

}  // namespace detail

/// Globally adaptive integration of f over [a, b]: bisect the segment with
/// the largest error estimate until the total error is below
/// max(abs_tol, rel_tol * |I|).
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                 Budget* budget = nullptr, int max_segments = 400) {
  if (a == b) return {};
  std::priority_queue<detail::Segment> heap;
  auto first = detail::rule21(f, a, b);
  if (budget) budget->charge(21);
  heap.push(first);
  double total = first.value;
  double error = first.error;
  int segments = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (segments >= max_segments || (budget && budget->exhausted())) {
      return {total, error, false};
    }
    const auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= std::min(worst.a, worst.b) || mid >= std::max(worst.a, worst.b)) {
      return {total, error, false};
    }
    heap.pop();
    auto left = detail::rule21(f, worst.a, mid);
    auto right = detail::rule21(f, mid, worst.b);
    if (budget) budget->charge(42);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    segments += 1;
  }
  return {total, error, true};
}

/// Options for integrate_toward.
struct TowardOptions {
  double rel_tol = 1e-10;
  /// Integrand is monotone non-decreasing toward the anchor; allows the tail
  /// to be closed early once it is within tolerance of `sup_bound`.
  bool monotone = false;
  /// Upper bound on the integrand on the whole interval; used with `monotone`.
  double sup_bound = std::numeric_limits<double>::infinity();
  Budget* budget = nullptr;
};

/// Integral of a non-negative f over [anchor, far] (either orientation) where
/// f may vary on arbitrarily small scales near `anchor`.
///
/// The interval is cut into geometric panels [anchor + L 2^{-k-1}, anchor + L 2^{-k}]
/// integrated adaptively to relative accuracy `rel_tol`. The panel sequence
/// stops once `tail_bound(delta)`, an upper bound for the integral over the
/// remaining length delta next to the anchor, is below 0.1 * rel_tol of the sum.
template <class F, class TailBound>
Result integrate_toward(F&& f, double anchor, double far, TailBound&& tail_bound,
                        const TowardOptions& opt = {}) {
  Result acc;
  const double length = far - anchor;
  if (length == 0.0) return acc;
  const double sign = length > 0 ? 1.0 : -1.0;
  double outer = length;
  for (int k = 0; k < 1100; ++k) {
    const double inner = 0.5 * outer;
    const double x_in = anchor + inner;
    const double x_out = anchor + outer;
    Result piece = integrate(f, std::min(x_in, x_out), std::max(x_in, x_out), opt.rel_tol, 0.0, opt.budget);
    acc += piece;
    const double delta = std::abs(inner);
    if (tail_bound(delta) <= 0.1 * opt.rel_tol * acc.value) return acc;
    if (opt.monotone && std::isfinite(opt.sup_bound)) {
      const double f_in = f(x_in);
      if (opt.budget) opt.budget->charge(1);
      const double spread = delta * (opt.sup_bound - f_in);
      if (spread <= 0.2 * opt.rel_tol * acc.value) {
        acc.value += delta * 0.5 * (opt.sup_bound + f_in);
        acc.abs_error += 0.5 * spread;
        return acc;
      }
    }
    if (opt.budget && opt.budget->exhausted()) {
      acc.converged = false;
      return acc;
    }
    if (delta == 0.0 || anchor + sign * delta == anchor) return acc;
    outer = inner;
  }
  acc.converged = false;
  return acc;
}

}  // namespace ews::gk
